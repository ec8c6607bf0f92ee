"""Experiment protocols: resampling grids, index tables, and the map of elections.

The map places each election at its (agreement, diversity, polarization)
feature vector, measures pairwise Euclidean feature distances, and embeds
the distance matrix in the plane with stress-majorization MDS.  All
protocols derive per-item seeds from the experiment seed, so results are
reproducible and independent of worker scheduling.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from .agreement import AGREEMENT_INDICES
from .core import Election, seeded_rng, stats, subsample
from .divpol import OuterDiversityConfig, cntr_div, cntr_pol, out_div, pair_pol, pcc_div, pcc_pol
from .generators import CultureSpec, sample
from .io import write_csv_matrix

__all__ = [
    "INDEX_NAMES",
    "evaluate_index",
    "FeatureVector",
    "ResamplingMatrix",
    "Embedding",
    "IndexTable",
    "MapEntry",
    "MapResult",
    "worker_count",
    "resampling_experiment",
    "index_table",
    "feature_vector",
    "feature_distance",
    "mds_embed",
    "complementarity",
    "correlations",
    "synthetic_map_entries",
    "map_of_elections",
]

SUBSAMPLE_CANDIDATES = 200
SUBSAMPLE_VOTERS = 1000

_INDEX_FUNCS: dict[str, Callable[[Election, int], float]] = {
    "satr": lambda e, seed: stats(e).satr,
    **{name: (lambda fn: lambda e, seed: fn(e))(fn) for name, fn in AGREEMENT_INDICES.items()},
    "cntr_div": cntr_div,
    "pcc_div": pcc_div,
    "out_div": lambda e, seed: out_div(e, OuterDiversityConfig(seed=seed)),
    "cntr_pol": cntr_pol,
    "pcc_pol": pcc_pol,
    "pair_pol": lambda e, seed: pair_pol(e),
}

INDEX_NAMES = (
    "satr",
    "av_agr",
    "cntr_agr",
    "pair_agr",
    "pcc_agr",
    "jacc_agr",
    "pccplus_agr",
    "cntr_div",
    "pcc_div",
    "out_div",
    "cntr_pol",
    "pcc_pol",
    "pair_pol",
)

DEFAULT_FEATURE_TRIPLE = ("pcc_agr", "pcc_div", "pcc_pol")


def evaluate_index(name: str, e: Election, seed: int = 0) -> float:
    """Evaluate a named index (clustering/sampling indices use the seed)."""
    try:
        fn = _INDEX_FUNCS[name]
    except KeyError:
        raise ValueError(f"unknown index {name!r}; available: {', '.join(INDEX_NAMES)}") from None
    return fn(e, seed)


def derive_seed(seed: int, *parts) -> int:
    """Stable 63-bit seed for a sub-task of a seeded experiment."""
    text = ":".join([str(seed), *map(str, parts)])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def worker_count() -> int:
    """Worker cap for internally parallel experiments.

    Set ``APPROVAL_DAP_THREADS`` to pin the count; defaults to the CPU
    count capped at 8.
    """
    env = os.environ.get("APPROVAL_DAP_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"APPROVAL_DAP_THREADS must be an integer, got {env!r}") from None
        return max(1, value)
    return min(os.cpu_count() or 1, 8)


def _parallel(fn, items: Sequence, threads: Optional[int]):
    threads = worker_count() if threads is None else max(1, threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- resampling experiment ----------------------------------------------

P_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
PHI_GRID = tuple(round(0.1 * j, 1) for j in range(0, 11))


@dataclass(frozen=True)
class ResamplingMatrix:
    """Mean index values over seeded resampling elections on a (p, phi) grid."""

    index: str
    p_values: tuple
    phi_values: tuple
    values: np.ndarray
    samples_per_cell: int

    def column_spread(self) -> np.ndarray:
        """Per-column max-min over the saturation parameter p."""
        return self.values.max(axis=0) - self.values.min(axis=0)

    def to_csv(self) -> str:
        headers = ["p\\phi", *[f"phi={phi:g}" for phi in self.phi_values]]
        rows = [[f"p={p:g}", *row] for p, row in zip(self.p_values, self.values)]
        return write_csv_matrix(rows, headers)


def resampling_experiment(
    index: str,
    m: int = 60,
    n: int = 60,
    samples: int = 10,
    seed: int = 0,
    threads: Optional[int] = None,
) -> ResamplingMatrix:
    """Mean of an index over seeded resampling elections for each grid cell.

    Rows fix the expected saturation ``p`` and columns fix the resampling
    noise ``phi``; an index whose columns are far from constant depends on
    saturation rather than on election structure.
    """
    if samples < 1:
        raise ValueError("need at least one sample per cell")
    if index not in INDEX_NAMES:
        raise ValueError(f"unknown index {index!r}")

    cells = [(i, j) for i in range(len(P_GRID)) for j in range(len(PHI_GRID))]

    def cell_mean(cell):
        i, j = cell
        total = 0.0
        for t in range(samples):
            cell_seed = derive_seed(seed, "resampling", i, j, t)
            e = sample(
                CultureSpec(
                    family="resampling",
                    m=m,
                    n=n,
                    seed=cell_seed,
                    params={"p": P_GRID[i], "phi": PHI_GRID[j]},
                )
            )
            total += evaluate_index(index, e, cell_seed)
        return total / samples

    flat = _parallel(cell_mean, cells, threads)
    values = np.array(flat).reshape(len(P_GRID), len(PHI_GRID))
    values.setflags(write=False)
    return ResamplingMatrix(
        index=index,
        p_values=P_GRID,
        phi_values=PHI_GRID,
        values=values,
        samples_per_cell=samples,
    )


# -- index table ---------------------------------------------------------


@dataclass(frozen=True)
class IndexTable:
    """Per-culture mean and standard deviation of every index."""

    labels: tuple
    indices: tuple
    means: np.ndarray
    stds: np.ndarray

    def row(self, label: str) -> dict:
        i = self.labels.index(label)
        return {
            name: (float(self.means[i, j]), float(self.stds[i, j]))
            for j, name in enumerate(self.indices)
        }

    def to_csv(self, decimals: Optional[int] = None) -> str:
        """CSV rendering; pass ``decimals=2`` for presentation-style rounding."""
        headers = ["label"]
        for name in self.indices:
            headers += [f"{name}_mean", f"{name}_std"]
        rows = []
        for i, label in enumerate(self.labels):
            row = [label]
            for j in range(len(self.indices)):
                mean, std = self.means[i, j], self.stds[i, j]
                if decimals is not None:
                    mean, std = round(mean, decimals), round(std, decimals)
                row += [mean, std]
            rows.append(row)
        return write_csv_matrix(rows, headers)


def index_table(
    specs: Sequence[CultureSpec],
    samples: int = 10,
    seed: int = 0,
    indices: Sequence[str] = INDEX_NAMES,
    threads: Optional[int] = None,
) -> IndexTable:
    """Sample each culture and tabulate mean/std of the selected indices.

    Each spec is drawn ``samples`` times under seeds derived from the
    experiment seed (overriding the spec's own seed field), so a table is
    reproducible from ``(specs, samples, seed)`` alone.  Standard
    deviations are population standard deviations over the sampled
    elections; deterministic cultures yield identical elections, but
    clustering-backed indices still vary with the per-sample seeds.
    """
    if samples < 1:
        raise ValueError("need at least one sample per culture")
    for name in indices:
        if name not in INDEX_NAMES:
            raise ValueError(f"unknown index {name!r}")

    tasks = [(r, t) for r in range(len(specs)) for t in range(samples)]

    def run(task):
        r, t = task
        run_seed = derive_seed(seed, "table", r, t)
        e = sample(specs[r].with_seed(run_seed))
        return [evaluate_index(name, e, run_seed) for name in indices]

    flat = np.array(_parallel(run, tasks, threads), dtype=np.float64)
    cube = flat.reshape(len(specs), samples, len(indices))
    stds = cube.std(axis=1)
    stds[stds < 1e-12] = 0.0  # identical samples should report exactly zero spread
    return IndexTable(
        labels=tuple(s.display_label() for s in specs),
        indices=tuple(indices),
        means=cube.mean(axis=1),
        stds=stds,
    )


# -- features and the map -------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    """(agreement, diversity, polarization) triple used for map distances."""

    agr: float
    div: float
    pol: float

    def as_array(self) -> np.ndarray:
        return np.array([self.agr, self.div, self.pol])


def feature_vector(
    e: Election,
    seed: int = 0,
    triple: Sequence[str] = DEFAULT_FEATURE_TRIPLE,
) -> FeatureVector:
    """Subsample oversized elections, then evaluate the feature triple."""
    if len(triple) != 3:
        raise ValueError("feature triple must name exactly three indices")
    sub = subsample(e, SUBSAMPLE_CANDIDATES, SUBSAMPLE_VOTERS, seed)
    values = [evaluate_index(name, sub, seed) for name in triple]
    return FeatureVector(*values)


def feature_distance(a: FeatureVector, b: FeatureVector) -> float:
    """Euclidean distance of two feature triples."""
    return math.dist((a.agr, a.div, a.pol), (b.agr, b.div, b.pol))


@dataclass(frozen=True)
class Embedding:
    """Planar MDS embedding plus its quality report.

    ``distortion`` is the mean over point pairs of
    ``max(d_emb/d_true, d_true/d_emb)``; 1 is a perfect embedding.
    """

    points: np.ndarray
    distortion: float
    stress: float
    stress_path: tuple = field(repr=False, default=())


def mds_embed(distances: np.ndarray, seed: int = 0, max_iter: int = 300, tol: float = 1e-9) -> Embedding:
    """Embed a distance matrix in 2-D by SMACOF stress majorization.

    Starts from the classical-MDS configuration (double-centered
    eigendecomposition) and iterates Guttman transforms until the metric
    stress decreases by less than ``tol`` (at most ``max_iter`` rounds).
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if not np.allclose(d, d.T, atol=1e-9):
        raise ValueError("distance matrix must be symmetric")
    if (d < 0).any():
        raise ValueError("distances must be nonnegative")
    if not np.allclose(np.diag(d), 0.0, atol=1e-12):
        raise ValueError("distance matrix must have a zero diagonal")
    if n == 1:
        return Embedding(points=np.zeros((1, 2)), distortion=1.0, stress=0.0)

    x = _classical_init(d)
    if not x.any() and d.max() > 0:
        rng = seeded_rng(seed, 0x3D5)
        x = rng.normal(scale=0.1 * d.max(), size=(n, 2))

    path = []
    prev = math.inf
    for _ in range(max_iter):
        edist = _pairwise(x)
        stress = float((np.triu(edist - d, 1) ** 2).sum())
        path.append(stress)
        if prev - stress < tol:
            break
        prev = stress
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(edist > 0, d / edist, 0.0)
        np.fill_diagonal(ratio, 0.0)
        guttman = -ratio
        np.fill_diagonal(guttman, ratio.sum(axis=1))
        x = guttman @ x / n

    edist = _pairwise(x)
    stress = float((np.triu(edist - d, 1) ** 2).sum())
    path.append(stress)
    iu = np.triu_indices(n, 1)
    true_d, emb_d = d[iu], edist[iu]
    mask = true_d > 1e-9
    if mask.any():
        with np.errstate(divide="ignore"):
            ratios = np.maximum(emb_d[mask] / true_d[mask], true_d[mask] / emb_d[mask])
        distortion = float(ratios.mean())
    else:
        distortion = 1.0
    return Embedding(points=x, distortion=distortion, stress=stress, stress_path=tuple(path))


def _classical_init(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    center = np.eye(n) - 1.0 / n
    b = -0.5 * center @ (d**2) @ center
    vals, vecs = scipy.linalg.eigh(b)
    top = np.clip(vals[-2:][::-1], 0.0, None)
    return vecs[:, -2:][:, ::-1] * np.sqrt(top)


def _pairwise(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


# -- complementarity and correlations --------------------------------------


def complementarity(x, y, z) -> float:
    """One minus the std of the summed triple over the summed stds.

    1 means the three index columns sum to a constant (they partition a
    fixed budget); identical columns give 0.  Population standard
    deviations throughout.
    """
    ax, ay, az = (np.asarray(v, dtype=np.float64) for v in (x, y, z))
    if not ax.shape == ay.shape == az.shape or ax.ndim != 1:
        raise ValueError("need three equal-length vectors")
    if ax.size < 2:
        raise ValueError("need at least two observations")
    denom = ax.std() + ay.std() + az.std()
    if denom == 0.0:
        raise ValueError("complementarity undefined for three constant vectors")
    return 1.0 - (ax + ay + az).std() / denom


def correlations(table) -> tuple[np.ndarray, np.ndarray]:
    """Pearson rho and Kendall tau-b matrices over index columns.

    Coefficients involving a constant column are undefined and recorded
    as NaN.
    """
    data = np.asarray(table, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("need a 2-D table with at least two elections")
    k = data.shape[1]
    stds = data.std(axis=0)
    rho = np.full((k, k), np.nan)
    tau = np.full((k, k), np.nan)
    centered = data - data.mean(axis=0)
    for i in range(k):
        if stds[i] == 0:
            continue
        rho[i, i] = tau[i, i] = 1.0
        for j in range(i + 1, k):
            if stds[j] == 0:
                continue
            r = float((centered[:, i] * centered[:, j]).mean() / (stds[i] * stds[j]))
            t = float(scipy.stats.kendalltau(data[:, i], data[:, j]).statistic)
            rho[i, j] = rho[j, i] = r
            tau[i, j] = tau[j, i] = t
    return rho, tau


# -- synthetic map corpus ---------------------------------------------------


@dataclass(frozen=True)
class MapEntry:
    """One map item: a culture spec plus the legend group it belongs to."""

    group: str
    spec: CultureSpec

    def to_dict(self) -> dict:
        return {"group": self.group, "spec": self.spec.to_dict()}

    @classmethod
    def from_dict(cls, data) -> "MapEntry":
        spec = CultureSpec.from_dict(data["spec"])
        return cls(group=data.get("group", spec.family), spec=spec)


def compass_specs(m: int = 60, n: int = 60) -> list[CultureSpec]:
    """The fourteen reference cultures spanning the agreement/diversity/
    polarization extremes, at the standard 60x60 size."""
    two_party = CultureSpec(family="k_party", m=m, n=n, params={"k": 2}, label="2-Party")
    triangle = CultureSpec(family="triangle", m=m, n=n, label="Triangle")
    return [
        CultureSpec(family="p_id", m=m, n=n, params={"p": 1 / 3}, label="1/3-ID"),
        two_party,
        CultureSpec(
            family="noisy", m=m, n=n, params={"phi": 0.6, "base": two_party}, label="N(2-Party,0.6)"
        ),
        CultureSpec(family="k_party", m=m, n=n, params={"k": 3}, label="3-Party"),
        CultureSpec(family="k_party", m=m, n=n, params={"k": 4}, label="4-Party"),
        CultureSpec(
            family="xy_two_party", m=m, n=n, params={"x": 1 / 3, "y": 1 / 3}, label="(1/3,1/3)-2-Party"
        ),
        CultureSpec(family="cyclic", m=m, n=n, label="Cyclic"),
        CultureSpec(family="diagonal", m=m, n=n, label="Diagonal"),
        triangle,
        CultureSpec(
            family="noisy", m=m, n=n, params={"phi": 0.6, "base": triangle}, label="N(Triangle,0.6)"
        ),
        CultureSpec(family="id_ic", m=m, n=n, params={"p": 0.5}, label="1/2-ID/IC"),
        CultureSpec(family="p_ic", m=m, n=n, params={"p": 0.5}, label="1/2-IC"),
        CultureSpec(family="p_ic", m=m, n=n, params={"p": 0.25}, label="1/4-IC"),
        CultureSpec(family="lin_ic", m=m, n=n, label="Lin-IC"),
    ]


def synthetic_map_entries(seed: int = 0) -> list[MapEntry]:
    """The bundled synthetic map corpus (244 elections).

    Compass cultures at 60x60 plus impartial-culture, Lin-IC, resampling,
    noisy-2-party, unbalanced-2-party, party-list, mixture, and planar
    Euclidean families at their standard sizes.  Randomized family
    parameters are drawn here so the corpus is fully declarative.
    """
    rng = seeded_rng(derive_seed(seed, "synthetic-map"), 0)
    entries = [MapEntry("compass", spec) for spec in compass_specs()]

    def add(group: str, spec: CultureSpec):
        entries.append(MapEntry(group, spec.with_seed(derive_seed(seed, group, len(entries)))))

    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        for copy in range(2):
            add("IC", CultureSpec(family="p_ic", m=100, n=1000, params={"p": p}, label=f"{p}-IC"))
    for _ in range(5):
        add("Lin-IC", CultureSpec(family="lin_ic", m=100, n=1000, label="Lin-IC"))
    for _ in range(50):
        p, phi = (float(v) for v in rng.random(2).round(6))
        add(
            "Resampling",
            CultureSpec(family="resampling", m=100, n=1000, params={"p": p, "phi": phi}),
        )
    two_party_100 = CultureSpec(family="k_party", m=100, n=100, params={"k": 2})
    for _ in range(25):
        phi = round(float(rng.random()), 6)
        add(
            "N(2-Party)",
            CultureSpec(family="noisy", m=100, n=100, params={"phi": phi, "base": two_party_100}),
        )
    for _ in range(25):
        x, y = (float(v) for v in rng.random(2).round(6))
        add(
            "(x,y)-2-Party",
            CultureSpec(family="xy_two_party", m=100, n=100, params={"x": x, "y": y}),
        )
    for _ in range(25):
        add("Party-list", CultureSpec(family="uneven_party_list", m=100, n=100))
    for k in (2, 3, 4, 5):
        for p in (0.1, 0.3, 0.5, 0.7, 0.9):
            add("ID-Mixture", CultureSpec(family="id_mixture", m=100, n=1000, params={"k": k, "p": p}))
    for k in (2, 3, 4, 5):
        for _ in range(5):
            add("IAM-Mixture", CultureSpec(family="iam_mixture", m=100, n=1000, params={"k": k}))
    for variant in (1, 2, 3, 4, 5):
        for _ in range(10):
            add(
                "2D-Euclidean",
                CultureSpec(family="euclidean", m=100, n=1000, params={"variant": variant}),
            )
    return entries


@dataclass(frozen=True)
class MapResult:
    """Everything the map command emits: features, distances, embedding."""

    labels: tuple
    groups: tuple
    features: np.ndarray
    distances: np.ndarray
    embedding: Embedding

    def feature_csv(self) -> str:
        rows = [
            [label, group, *feat]
            for label, group, feat in zip(self.labels, self.groups, self.features)
        ]
        return write_csv_matrix(rows, ["label", "group", "agr", "div", "pol"])

    def distance_csv(self) -> str:
        rows = [[label, *row] for label, row in zip(self.labels, self.distances)]
        return write_csv_matrix(rows, ["label", *self.labels])

    def embedding_csv(self) -> str:
        rows = [
            [label, group, x, y]
            for label, group, (x, y) in zip(self.labels, self.groups, self.embedding.points)
        ]
        return write_csv_matrix(rows, ["label", "group", "x", "y"])


def map_of_elections(
    items: Iterable[tuple[str, str, Election]],
    seed: int = 0,
    triple: Sequence[str] = DEFAULT_FEATURE_TRIPLE,
    threads: Optional[int] = None,
) -> MapResult:
    """Compute feature vectors for ``(label, group, election)`` items and
    embed their pairwise feature distances."""
    items = list(items)
    if len(items) < 2:
        raise ValueError("a map needs at least two elections")

    def features_for(task):
        idx, (label, group, e) = task
        arr = feature_vector(e, derive_seed(seed, "map", idx), triple).as_array()
        e._memo.clear()  # large pair matrices are not needed past this point
        return arr

    rows = _parallel(features_for, list(enumerate(items)), threads)
    features = np.array(rows)
    diff = features[:, None, :] - features[None, :, :]
    distances = np.sqrt((diff**2).sum(axis=2))
    distances = 0.5 * (distances + distances.T)
    np.fill_diagonal(distances, 0.0)
    embedding = mds_embed(distances, seed=seed)
    return MapResult(
        labels=tuple(label for label, _, _ in items),
        groups=tuple(group for _, group, _ in items),
        features=features,
        distances=distances,
        embedding=embedding,
    )
