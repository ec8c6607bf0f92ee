"""Diversity and polarization indices.

Diversity is measured two ways: by how little agreement survives after
clustering voters into up to five like-minded groups (``a``-diversity for
an agreement index ``a``), and by how close the election sits to the
saturation-matched universe of all ballots (outer diversity).
Polarization is the agreement gained by splitting the voters into two
groups, plus a distance-spread variant based on the standard deviation of
pairwise Hamming distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse
from scipy.optimize import linprog

from .agreement import cntr_agr, pcc_agr
from .clustering import Partition, kmedoids_hamming, spectral_pcc, weighted_cluster_agreement
from .core import Election, seeded_rng
from .metrics import cross_hamming, hamming_matrix

__all__ = [
    "OuterDiversityConfig",
    "a_div",
    "a_pol",
    "cntr_div",
    "pcc_div",
    "cntr_pol",
    "pcc_pol",
    "pair_pol",
    "ham_single_to_unc",
    "ham_to_universe",
    "out_div",
]

_DIV_MAX_CLUSTERS = 5
_SAMPLE_STREAM = 0x0D1F
_EXACT_UNIVERSE_MAX_M = 20

Clusterer = Callable[[Election, int, int], Partition]


@dataclass(frozen=True)
class OuterDiversityConfig:
    """Sampling controls for the outer-diversity estimate.

    ``sample_multiplier`` reference ballots are drawn per voter; the seed
    fixes the sample stream.
    """

    sample_multiplier: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.sample_multiplier < 1:
            raise ValueError("sample_multiplier must be at least 1")


def a_div(e: Election, agr, clusterer: Clusterer, seed: int) -> float:
    """Clustering-based diversity: one minus the mean best within-cluster
    agreement over cluster counts 1..5 (the count-1 term is ``agr(e)``)."""
    values = [agr(e)]
    for k in range(2, _DIV_MAX_CLUSTERS + 1):
        partition = clusterer(e, k, seed)
        values.append(weighted_cluster_agreement(e, partition, agr))
    return min(1.0, max(0.0, 1.0 - sum(values) / _DIV_MAX_CLUSTERS))


def a_pol(e: Election, agr, clusterer: Clusterer, seed: int) -> float:
    """Clustering-based polarization: agreement gain of the best found
    2-partition over the whole election.

    The trivial single-block partition is always a candidate, so the value
    is nonnegative before clamping.
    """
    base = agr(e)
    partition = clusterer(e, 2, seed)
    best = max(weighted_cluster_agreement(e, partition, agr), base)
    return min(1.0, best - base)


def _kmedoids_clusterer(e: Election, k: int, seed: int) -> Partition:
    return kmedoids_hamming(e, k, seed)


def cntr_div(e: Election, seed: int = 0) -> float:
    """Central diversity: :func:`a_div` with central agreement and k-medoids."""
    return a_div(e, cntr_agr, _kmedoids_clusterer, seed)


def pcc_div(e: Election, seed: int = 0) -> float:
    """PCC diversity: :func:`a_div` with PCC agreement and spectral clustering."""
    return a_div(e, pcc_agr, spectral_pcc, seed)


def cntr_pol(e: Election, seed: int = 0) -> float:
    """Central polarization: :func:`a_pol` with central agreement and k-medoids."""
    return a_pol(e, cntr_agr, _kmedoids_clusterer, seed)


def pcc_pol(e: Election, seed: int = 0) -> float:
    """PCC polarization: :func:`a_pol` with PCC agreement and spectral clustering."""
    return a_pol(e, pcc_agr, spectral_pcc, seed)


def pair_pol(e: Election) -> float:
    """Pairwise polarization: ``2/m`` times the population standard
    deviation of Hamming distances over all ordered ballot pairs."""
    n, m = e.num_voters, e.num_candidates
    ham = hamming_matrix(e)
    s1 = int(ham.sum())
    s2 = int((ham * ham).sum())
    var_numer = n * n * s2 - s1 * s1
    return 2.0 * math.sqrt(var_numer) / (n * n * m)


def ham_single_to_unc(p: float, q: float) -> float:
    """Per-candidate distance of one ballot with a ``q`` fraction of ones
    to the ``p``-weighted ballot universe: ``p(1-q) + q(1-p)``."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("fractions must lie in [0, 1]")
    return p * (1.0 - q) + q * (1.0 - p)


def _distinct_rows(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.unique(mat, axis=0, return_counts=True)


def _transport(cost: np.ndarray, supply: np.ndarray, demand: np.ndarray) -> float:
    """Optimal value of the transportation problem (min-cost coupling)."""
    r, c = cost.shape
    if supply.shape != (r,) or demand.shape != (c,):
        raise ValueError("supply/demand shapes do not match the cost matrix")
    row_idx = np.repeat(np.arange(r), c)
    col_idx = np.tile(np.arange(c), r) + r
    var_idx = np.arange(r * c)
    a_eq = scipy.sparse.coo_matrix(
        (
            np.ones(2 * r * c),
            (np.concatenate([row_idx, col_idx]), np.concatenate([var_idx, var_idx])),
        ),
        shape=(r + c, r * c),
    ).tocsr()
    b_eq = np.concatenate([supply, demand]).astype(np.float64)
    res = linprog(cost.ravel().astype(np.float64), A_eq=a_eq, b_eq=b_eq, method="highs")
    if res.status != 0:
        raise RuntimeError(f"transportation solve failed: {res.message}")
    return float(res.fun)


def ham_to_universe(e: Election, cfg: OuterDiversityConfig | None = None, exact: bool = False) -> float:
    """Per-candidate optimal-matching distance of the election's ballots to
    the saturation-weighted ballot universe.

    The universe weights each ballot by its probability under independent
    approvals with the election's saturation.  By default the universe is
    approximated with ``sample_multiplier`` seeded draws per voter and the
    matching is solved as a transportation problem over distinct ballots;
    with ``exact=True`` the full weighted universe of ``2^m`` ballots is
    used (only viable for small ``m``).
    """
    cfg = cfg if cfg is not None else OuterDiversityConfig()
    n, m = e.num_voters, e.num_candidates
    total = e.total_approvals()
    if total in (0, n * m):
        return 0.0
    p = total / (n * m)

    ballots, counts = _distinct_rows(e.matrix)
    if exact:
        if m > _EXACT_UNIVERSE_MAX_M:
            raise ValueError(f"exact universe infeasible for m={m} (limit {_EXACT_UNIVERSE_MAX_M})")
        codes = np.arange(2**m, dtype=np.int64)
        universe = ((codes[:, None] >> np.arange(m)) & 1).astype(np.uint8)
        ones = universe.sum(axis=1)
        weights = p**ones * (1.0 - p) ** (m - ones)
        supply = counts / n
        demand = weights * (supply.sum() / weights.sum())
        cost = cross_hamming(Election(ballots), Election(universe)).astype(np.float64)
        return _transport(cost, supply, demand) / m

    rng = seeded_rng(cfg.seed, _SAMPLE_STREAM)
    n_samples = cfg.sample_multiplier * n
    samples = (rng.random((n_samples, m)) < p).astype(np.uint8)
    sample_ballots, sample_counts = _distinct_rows(samples)
    cost = cross_hamming(Election(ballots), Election(sample_ballots)).astype(np.float64)
    value = _transport(
        cost,
        (counts * cfg.sample_multiplier).astype(np.float64),
        sample_counts.astype(np.float64),
    )
    return value / (n_samples * m)


def out_div(e: Election, cfg: OuterDiversityConfig | None = None, exact: bool = False) -> float:
    """Outer diversity: how close the ballots come to covering the
    saturation-matched ballot universe.

    With saturation ``p`` the distance of a single repeated ballot to the
    universe is ``2p(1-p)``, which normalizes the index to [0, 1]; a lone
    ballot scores 0 and the full weighted universe scores 1.  Elections
    with saturation 0 or 1 score 0.
    """
    n, m = e.num_voters, e.num_candidates
    total = e.total_approvals()
    if total in (0, n * m):
        return 0.0
    p = total / (n * m)
    distance = ham_to_universe(e, cfg, exact=exact)
    return min(1.0, max(0.0, 1.0 - distance / (2.0 * p * (1.0 - p))))
