"""Seeded samplers for special and synthetic election families.

Randomized families draw every voter from its own counter-based
substream, so elections are reproducible across platforms and identical
whether votes are generated sequentially or in parallel.  Deterministic
families (identity, party, diagonal, triangle, cyclic) ignore the seed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import Election, seeded_rng

__all__ = [
    "CultureSpec",
    "FAMILIES",
    "sample",
    "gen_p_id",
    "gen_k_party",
    "gen_xy_two_party",
    "gen_diagonal",
    "gen_triangle",
    "gen_cyclic",
    "gen_p_ic",
    "gen_iam",
    "gen_resampling",
    "gen_euclidean",
    "gen_id_ic",
    "gen_lin_ic",
    "gen_noisy",
    "gen_id_mixture",
    "gen_iam_mixture",
    "gen_uneven_party_list",
]

# substream layout: voter i draws from substream i; election-level draws
# (point clouds, group splits, per-group parameters) start here
_ELECTION_STREAM = 1 << 32


def _master(family: str, seed: int) -> int:
    digest = hashlib.blake2b(f"{family}:{seed}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _voter_rng(master: int, voter: int):
    return seeded_rng(master, voter)


def _election_rng(master: int, slot: int = 0):
    return seeded_rng(master, _ELECTION_STREAM + slot)


def _check_sizes(m: int, n: int) -> None:
    if m < 1 or n < 1:
        raise ValueError(f"election sizes must be positive, got m={m}, n={n}")


def _check_prob(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _id_prefix(m: int, p: float) -> np.ndarray:
    approved = int(math.floor(p * m))
    ballot = np.zeros(m, dtype=np.uint8)
    ballot[:approved] = 1
    return ballot


def _split_sizes(total: int, k: int) -> list[int]:
    # equal sizes up to +/-1; earlier groups receive the extras
    base, extras = divmod(total, k)
    return [base + 1] * extras + [base] * (k - extras)


# -- special (deterministic) elections --------------------------------


def gen_p_id(m: int, n: int, p: float) -> Election:
    """Identity election: every voter approves the same first ``floor(p*m)`` candidates."""
    _check_sizes(m, n)
    _check_prob(p, "p")
    return Election(np.tile(_id_prefix(m, p), (n, 1)))


def gen_k_party(m: int, n: int, k: int) -> Election:
    """``k`` equal blocks of candidates and voters; block ``i`` voters approve block ``i``."""
    _check_sizes(m, n)
    if not 1 <= k <= min(m, n):
        raise ValueError(f"party count must satisfy 1 <= k <= min(m, n), got k={k}")
    cand_sizes = _split_sizes(m, k)
    voter_sizes = _split_sizes(n, k)
    return _party_blocks(m, cand_sizes, voter_sizes)


def _party_blocks(m: int, cand_sizes: Sequence[int], voter_sizes: Sequence[int]) -> Election:
    mat = np.zeros((sum(voter_sizes), m), dtype=np.uint8)
    c0 = v0 = 0
    for cs, vs in zip(cand_sizes, voter_sizes):
        mat[v0 : v0 + vs, c0 : c0 + cs] = 1
        c0 += cs
        v0 += vs
    return Election(mat)


def gen_xy_two_party(m: int, n: int, x: float, y: float) -> Election:
    """Two-party election whose first party holds an ``x`` fraction of the
    candidates and a ``y`` fraction of the voters."""
    _check_sizes(m, n)
    _check_prob(x, "x")
    _check_prob(y, "y")
    c1 = int(math.floor(x * m))
    v1 = int(math.floor(y * n))
    return _party_blocks(m, [c1, m - c1], [v1, n - v1])


def gen_diagonal(m: int) -> Election:
    """The ``m``-party election: each voter approves exactly their own candidate."""
    return gen_k_party(m, m, m)


def gen_triangle(m: int) -> Election:
    """Voter ``i`` approves the first ``i`` candidates (requires ``n = m``)."""
    _check_sizes(m, m)
    return Election(np.tril(np.ones((m, m), dtype=np.uint8)))


def gen_cyclic(m: int) -> Election:
    """First ballot approves candidate 1 and the last ``floor(m/2) - 1``
    candidates; each next ballot is the previous shifted cyclically right."""
    _check_sizes(m, m)
    first = np.zeros(m, dtype=np.uint8)
    first[0] = 1
    tail = max(m // 2 - 1, 0)
    if tail:
        first[m - tail :] = 1
    mat = np.stack([np.roll(first, i) for i in range(m)])
    return Election(mat)


# -- randomized cultures -----------------------------------------------


def gen_p_ic(m: int, n: int, p: float, seed: int) -> Election:
    """Impartial culture: every entry approved independently with probability ``p``."""
    _check_sizes(m, n)
    _check_prob(p, "p")
    master = _master("p_ic", seed)
    rows = [(_voter_rng(master, i).random(m) < p) for i in range(n)]
    return Election(np.array(rows, dtype=np.uint8))


def gen_iam(m: int, n: int, probs: Sequence[float], seed: int) -> Election:
    """Independent approvals with a per-candidate probability vector."""
    _check_sizes(m, n)
    pvec = np.asarray(probs, dtype=np.float64)
    if pvec.shape != (m,):
        raise ValueError(f"need {m} per-candidate probabilities, got shape {pvec.shape}")
    if pvec.min() < 0.0 or pvec.max() > 1.0:
        raise ValueError("per-candidate probabilities must lie in [0, 1]")
    master = _master("iam", seed)
    rows = [(_voter_rng(master, i).random(m) < pvec) for i in range(n)]
    return Election(np.array(rows, dtype=np.uint8))


def _resample_row(rng, central: np.ndarray, p: float, phi: float) -> np.ndarray:
    resampled = rng.random(central.size) < phi
    fresh = rng.random(central.size) < p
    return np.where(resampled, fresh, central.astype(bool))


def gen_resampling(m: int, n: int, p: float, phi: float, seed: int) -> Election:
    """Each entry copies the central identity ballot with probability
    ``1 - phi`` and is otherwise redrawn with approval probability ``p``."""
    _check_sizes(m, n)
    _check_prob(p, "p")
    _check_prob(phi, "phi")
    central = _id_prefix(m, p)
    master = _master("resampling", seed)
    rows = [_resample_row(_voter_rng(master, i), central, p, phi) for i in range(n)]
    return Election(np.array(rows, dtype=np.uint8))


def gen_euclidean(m: int, n: int, variant: int, seed: int) -> Election:
    """Planar spatial model: points uniform on the unit square.

    Variants: (1) approve within radius 0.117, (2) within radius 0.167,
    (3) within a per-voter radius uniform on [0, 0.5], (4) approve the
    ``min(10, m)`` nearest candidates, (5) approve a per-voter uniform
    number of nearest candidates from 1..m.
    """
    _check_sizes(m, n)
    if variant not in (1, 2, 3, 4, 5):
        raise ValueError(f"euclidean variant must be 1..5, got {variant}")
    rng = _election_rng(_master("euclidean", seed))
    cand_pts = rng.random((m, 2))
    voter_pts = rng.random((n, 2))
    dist = np.linalg.norm(voter_pts[:, None, :] - cand_pts[None, :, :], axis=2)
    if variant in (1, 2):
        radius = 0.117 if variant == 1 else 0.167
        mat = dist < radius
    elif variant == 3:
        radii = rng.random(n) * 0.5
        mat = dist < radii[:, None]
    else:
        counts = np.full(n, min(10, m)) if variant == 4 else rng.integers(1, m + 1, size=n)
        order = np.argsort(dist, axis=1, kind="stable")
        mat = np.zeros((n, m), dtype=np.uint8)
        for i in range(n):
            mat[i, order[i, : counts[i]]] = 1
    return Election(np.asarray(mat, dtype=np.uint8))


def gen_id_ic(m: int, n: int, p: float, seed: int) -> Election:
    """First half of the voters share the ``p``-identity ballot, the rest
    are impartial culture with the same ``p``."""
    _check_sizes(m, n)
    _check_prob(p, "p")
    n_id = n // 2
    central = _id_prefix(m, p)
    master = _master("id_ic", seed)
    rows = [central] * n_id
    rows += [(_voter_rng(master, i).random(m) < p).astype(np.uint8) for i in range(n_id, n)]
    return Election(np.array(rows, dtype=np.uint8))


def gen_lin_ic(m: int, n: int, seed: int) -> Election:
    """Impartial culture with approval probability sliding from 1 down to ``1/n``."""
    _check_sizes(m, n)
    master = _master("lin_ic", seed)
    rows = [(_voter_rng(master, i).random(m) < (1.0 - i / n)) for i in range(n)]
    return Election(np.array(rows, dtype=np.uint8))


def gen_noisy(base: Election, phi: float, seed: int) -> Election:
    """Resample each ballot of ``base`` around itself: entries are kept
    with probability ``1 - phi`` and otherwise redrawn with that ballot's
    own approval fraction."""
    _check_prob(phi, "phi")
    m = base.num_candidates
    master = _master("noisy", seed)
    lengths = base.ballot_lengths()
    mat = base.matrix
    rows = [
        _resample_row(_voter_rng(master, i), mat[i], lengths[i] / m, phi)
        for i in range(base.num_voters)
    ]
    return Election(np.array(rows, dtype=np.uint8), label=base.label)


def gen_id_mixture(m: int, n: int, k: int, p: float, seed: int) -> Election:
    """Voters split uniformly into ``k`` groups; each group shares one
    ballot drawn from ``p``-impartial culture."""
    _check_sizes(m, n)
    _check_prob(p, "p")
    if k < 1:
        raise ValueError("group count must be positive")
    master = _master("id_mixture", seed)
    groups = _election_rng(master).integers(0, k, size=n)
    ballots = {g: (_election_rng(master, 1 + g).random(m) < p).astype(np.uint8) for g in range(k)}
    return Election(np.array([ballots[g] for g in groups], dtype=np.uint8))


def gen_iam_mixture(m: int, n: int, k: int, seed: int) -> Election:
    """Voters split uniformly into ``k`` groups; each group draws its own
    per-candidate probabilities uniformly and votes independently."""
    _check_sizes(m, n)
    if k < 1:
        raise ValueError("group count must be positive")
    master = _master("iam_mixture", seed)
    groups = _election_rng(master).integers(0, k, size=n)
    probs = {g: _election_rng(master, 1 + g).random(m) for g in range(k)}
    rows = [(_voter_rng(master, i).random(m) < probs[groups[i]]) for i in range(n)]
    return Election(np.array(rows, dtype=np.uint8))


def _random_composition(total: int, k: int, rng) -> list[int]:
    # uniform composition of `total` into k parts >= 1 (stars and bars)
    if k == 1:
        return [total]
    cuts = np.sort(rng.choice(total - 1, size=k - 1, replace=False)) + 1
    bounds = np.concatenate([[0], cuts, [total]])
    return list(np.diff(bounds))


def gen_uneven_party_list(m: int, n: int, seed: int) -> Election:
    """Party-list election with a Poisson(1)+3 number of parties and
    uniformly random (composition) block sizes for candidates and voters."""
    _check_sizes(m, n)
    rng = _election_rng(_master("uneven_party_list", seed))
    k = 3 + int(rng.poisson(1.0))
    k = min(k, m, n)
    cand_sizes = _random_composition(m, k, rng)
    voter_sizes = _random_composition(n, k, rng)
    return _party_blocks(m, cand_sizes, voter_sizes)


# -- declarative specs --------------------------------------------------

FAMILIES = (
    "p_id",
    "k_party",
    "xy_two_party",
    "diagonal",
    "triangle",
    "cyclic",
    "p_ic",
    "iam",
    "resampling",
    "euclidean",
    "id_ic",
    "lin_ic",
    "noisy",
    "id_mixture",
    "iam_mixture",
    "uneven_party_list",
)


@dataclass(frozen=True)
class CultureSpec:
    """Declarative description of one election draw.

    ``params`` carries the family-specific parameters; for the ``noisy``
    family it holds ``phi`` plus a nested ``base`` spec whose own seed is
    superseded by the outer spec's seed when sampling.  Specs serialize to
    plain dicts so experiment manifests can be stored as JSON.
    """

    family: str
    m: int
    n: int
    seed: int = 0
    params: Mapping = field(default_factory=dict)
    label: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    def with_seed(self, seed: int) -> "CultureSpec":
        return replace(self, seed=seed)

    def display_label(self) -> str:
        if self.label:
            return self.label
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()) if k != "base")
        return f"{self.family}({inner})#{self.seed}" if inner else f"{self.family}#{self.seed}"

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "base" in params and isinstance(params["base"], CultureSpec):
            params["base"] = params["base"].to_dict()
        out = {"family": self.family, "m": self.m, "n": self.n, "seed": self.seed, "params": params}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "CultureSpec":
        params = dict(data.get("params", {}))
        if "base" in params and isinstance(params["base"], Mapping):
            params["base"] = cls.from_dict(params["base"])
        return cls(
            family=data["family"],
            m=int(data["m"]),
            n=int(data["n"]),
            seed=int(data.get("seed", 0)),
            params=params,
            label=data.get("label"),
        )

    def sample(self) -> Election:
        return sample(self)


def sample(spec: CultureSpec) -> Election:
    """Draw the election described by a spec; deterministic per (spec, seed)."""
    m, n, seed, params = spec.m, spec.n, spec.seed, dict(spec.params)
    family = spec.family
    if family in ("diagonal", "triangle", "cyclic") and m != n:
        raise ValueError(f"{family} elections require n = m, got m={m}, n={n}")
    if family == "p_id":
        e = gen_p_id(m, n, params["p"])
    elif family == "k_party":
        e = gen_k_party(m, n, int(params["k"]))
    elif family == "xy_two_party":
        e = gen_xy_two_party(m, n, params["x"], params["y"])
    elif family == "diagonal":
        e = gen_diagonal(m)
    elif family == "triangle":
        e = gen_triangle(m)
    elif family == "cyclic":
        e = gen_cyclic(m)
    elif family == "p_ic":
        e = gen_p_ic(m, n, params["p"], seed)
    elif family == "iam":
        e = gen_iam(m, n, params["probs"], seed)
    elif family == "resampling":
        e = gen_resampling(m, n, params["p"], params["phi"], seed)
    elif family == "euclidean":
        e = gen_euclidean(m, n, int(params["variant"]), seed)
    elif family == "id_ic":
        e = gen_id_ic(m, n, params["p"], seed)
    elif family == "lin_ic":
        e = gen_lin_ic(m, n, seed)
    elif family == "noisy":
        base_spec = params["base"]
        if not isinstance(base_spec, CultureSpec):
            base_spec = CultureSpec.from_dict(base_spec)
        base = sample(base_spec.with_seed(seed))
        e = gen_noisy(base, params["phi"], seed)
    elif family == "id_mixture":
        e = gen_id_mixture(m, n, int(params["k"]), params["p"], seed)
    elif family == "iam_mixture":
        e = gen_iam_mixture(m, n, int(params["k"]), seed)
    elif family == "uneven_party_list":
        e = gen_uneven_party_list(m, n, seed)
    else:  # pragma: no cover - guarded by __post_init__
        raise ValueError(f"unknown family {family!r}")
    e.label = spec.display_label()
    return e
