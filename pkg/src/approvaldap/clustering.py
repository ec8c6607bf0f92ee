"""Voter-partition heuristics behind the clustering-based indices.

Two clusterers are provided: k-medoids under Hamming distance (cluster
centers restricted to observed ballots) and spectral clustering on a PCC
affinity.  Optimal partitioning is out of reach, so both are seeded
heuristics; given the same election, cluster count, and seed they return
the same partition on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .core import Election, restrict_voters, seeded_rng
from .metrics import hamming_matrix, pcc_matrix

__all__ = [
    "Partition",
    "kmedoids_hamming",
    "spectral_pcc",
    "weighted_cluster_agreement",
]

_KMEDOIDS_MAX_ITER = 100
_KMEANS_MAX_ITER = 50
_KMEANS_INITS = 10
_MEDOID_STREAM = 0x4D00
_KMEANS_STREAM = 0x5300


@dataclass(frozen=True)
class Partition:
    """Assignment of ``n`` voters to ``k`` disjoint clusters.

    Cluster ids that appear form a prefix of ``[0, k)``; trailing clusters
    may be empty (e.g. when ``k`` exceeds the number of distinct ballots).
    """

    assignments: tuple
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("partition needs at least one cluster")
        seen = set(self.assignments)
        if not seen:
            raise ValueError("partition covers no voters")
        top = max(seen)
        if min(seen) < 0 or top >= self.k:
            raise ValueError("cluster id out of range")
        if seen != set(range(top + 1)):
            raise ValueError("cluster ids must form a prefix of [0, k)")

    @classmethod
    def from_labels(cls, labels: Sequence[int], k: int) -> "Partition":
        """Normalize arbitrary labels to first-appearance order."""
        remap: dict[int, int] = {}
        out = []
        for lab in labels:
            lab = int(lab)
            if lab not in remap:
                remap[lab] = len(remap)
            out.append(remap[lab])
        return cls(assignments=tuple(out), k=k)

    @property
    def num_voters(self) -> int:
        return len(self.assignments)

    def groups(self) -> list[np.ndarray]:
        """Voter indices per cluster, ``k`` entries, trailing ones possibly empty."""
        labels = np.asarray(self.assignments)
        return [np.flatnonzero(labels == c) for c in range(self.k)]


def _singletons(n: int) -> Partition:
    # requests with k > n run with k = n
    return Partition(assignments=tuple(range(n)), k=n)


def _plus_plus_pick(dist_to_chosen: np.ndarray, chosen: list[int], rng) -> int:
    """k-means++ style draw: probability proportional to squared distance."""
    weights = dist_to_chosen.astype(np.float64) ** 2
    s = weights.sum()
    if s <= 0.0:
        remaining = np.setdiff1d(np.arange(weights.size), np.asarray(chosen, dtype=np.int64))
        if remaining.size == 0:
            return int(rng.integers(weights.size))
        return int(remaining[rng.integers(remaining.size)])
    return int(rng.choice(weights.size, p=weights / s))


def kmedoids_hamming(e: Election, k: int, seed: int, restarts: int = 10) -> Partition:
    """Partition voters by k-medoids on Hamming distance.

    Medoids are observed ballots.  Assignment breaks ties toward the
    lowest cluster id, updates pick the lowest-index minimizer, and the
    loop stops once the total intra-cluster distance stops decreasing (or
    after 100 rounds).  The best of ``restarts`` seeded k-means++ style
    initializations is returned.
    """
    if k < 1:
        raise ValueError("cluster count must be positive")
    if restarts < 1:
        raise ValueError("need at least one restart")
    n = e.num_voters
    if k >= n:
        return _singletons(n)
    if k == 1:
        return Partition(assignments=(0,) * n, k=1)

    dist = hamming_matrix(e)
    best_obj = math.inf
    best_labels = None
    for restart in range(restarts):
        rng = seeded_rng(seed, _MEDOID_STREAM + restart)
        medoids = [int(rng.integers(n))]
        closest = dist[medoids[0]].copy()
        while len(medoids) < k:
            nxt = _plus_plus_pick(closest, medoids, rng)
            medoids.append(nxt)
            np.minimum(closest, dist[nxt], out=closest)
        labels, obj = _kmedoids_descent(dist, np.asarray(medoids))
        if obj < best_obj:
            best_obj = obj
            best_labels = labels
    return Partition.from_labels(best_labels, k)


def _kmedoids_descent(dist: np.ndarray, medoids: np.ndarray) -> tuple[np.ndarray, int]:
    n = dist.shape[0]
    k = medoids.size
    prev_obj = math.inf
    for _ in range(_KMEDOIDS_MAX_ITER):
        labels = np.argmin(dist[:, medoids], axis=1)
        for c in range(k):
            members = np.flatnonzero(labels == c)
            if members.size:
                costs = dist[np.ix_(members, members)].sum(axis=0)
                medoids[c] = members[int(np.argmin(costs))]
        obj = int(dist[np.arange(n), medoids[labels]].sum())
        assert obj <= prev_obj, "k-medoids objective increased"
        if obj >= prev_obj:
            break
        prev_obj = obj
    labels = np.argmin(dist[:, medoids], axis=1)
    obj = int(dist[np.arange(n), medoids[labels]].sum())
    return labels, obj


def _spectral_groups(e: Election, literal_affinity: bool):
    """Distinct-ballot spectral system: (group index per voter, weights, basis).

    Duplicate ballots are interchangeable vertices of the affinity graph,
    so they are collapsed into one vertex weighted by multiplicity.  The
    group-constant eigenvectors of the expanded normalized Laplacian are
    exactly the eigenvectors of the collapsed symmetric system below, and
    they occupy the bottom of the spectrum; working with them resolves
    the eigenvector ambiguity that repeated ballots would otherwise cause.
    """
    key = ("spectral_groups", literal_affinity)
    return e._cache(key, lambda: _compute_spectral_groups(e, literal_affinity))


def _compute_spectral_groups(e: Election, literal_affinity: bool):
    ballots, inverse, counts = np.unique(
        e.matrix, axis=0, return_inverse=True, return_counts=True
    )
    distinct = Election(ballots)
    pcc = pcc_matrix(distinct)
    if literal_affinity:
        affinity = 1.0 + 0.5 * pcc
    else:
        affinity = 0.5 * (1.0 + pcc)
    weights = counts.astype(np.float64)
    degree = affinity @ weights
    scale = np.sqrt(weights) / np.sqrt(degree)
    system = affinity * np.outer(scale, scale)
    system = 0.5 * (system + system.T)
    _, vecs = scipy.linalg.eigh(system)
    basis = vecs[:, ::-1].copy()
    return inverse.ravel(), weights, basis


def spectral_pcc(e: Election, k: int, seed: int, literal_affinity: bool = False) -> Partition:
    """Partition voters by spectral clustering on the PCC affinity.

    The affinity of two ballots is ``(1 + pcc) / 2``, rescaled to [0, 1]
    so that 0 means total dissimilarity and 1 means equal votes
    (``literal_affinity`` keeps the unshifted ``1 + pcc/2`` variant for
    sensitivity checks).  Rows of the k leading eigenvectors of the
    symmetric-normalized graph Laplacian are length-normalized and
    clustered with seeded k-means; identical ballots always land in the
    same cluster.
    """
    if k < 1:
        raise ValueError("cluster count must be positive")
    n = e.num_voters
    if k >= n:
        return _singletons(n)
    if k == 1:
        return Partition(assignments=(0,) * n, k=1)

    inverse, weights, basis = _spectral_groups(e, literal_affinity)
    dims = min(k, basis.shape[1])
    embed = basis[:, :dims].copy()
    norms = np.linalg.norm(embed, axis=1)
    nz = norms > 0
    embed[nz] /= norms[nz, None]
    group_labels = _kmeans(embed, k, weights, seed)
    return Partition.from_labels(group_labels[inverse], k)


def _kmeans(points: np.ndarray, k: int, weights: np.ndarray, seed: int) -> np.ndarray:
    best_inertia = math.inf
    best_labels = None
    for init in range(_KMEANS_INITS):
        rng = seeded_rng(seed, _KMEANS_STREAM + init)
        labels, inertia = _kmeans_single(points, k, weights, rng)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _kmeans_single(points: np.ndarray, k: int, weights: np.ndarray, rng) -> tuple[np.ndarray, float]:
    n = points.shape[0]
    k = min(k, n)
    centers = np.empty((k, points.shape[1]))
    first = int(rng.choice(n, p=weights / weights.sum()))
    chosen = [first]
    centers[0] = points[first]
    closest = np.linalg.norm(points - centers[0], axis=1)
    for c in range(1, k):
        nxt = _plus_plus_pick(np.sqrt(weights) * closest, chosen, rng)
        chosen.append(nxt)
        centers[c] = points[nxt]
        np.minimum(closest, np.linalg.norm(points - centers[c], axis=1), out=closest)

    labels = None
    for _ in range(_KMEANS_MAX_ITER):
        sq = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(sq, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = np.average(points[members], axis=0, weights=weights[members])
    sq = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float((weights * sq[np.arange(n), labels]).sum())
    return labels, inertia


def weighted_cluster_agreement(
    e: Election,
    partition: Partition,
    agr: Callable[[Election], float],
) -> float:
    """Cluster-size-weighted mean of an agreement index over sub-elections.

    Empty clusters carry weight zero; singleton and degenerate-saturation
    clusters are identity sub-elections and score 1 through ``agr`` itself.
    """
    if partition.num_voters != e.num_voters:
        raise ValueError("partition does not cover the election's voters")
    n = e.num_voters
    total = 0.0
    for members in partition.groups():
        if members.size == 0:
            continue
        total += (members.size / n) * agr(restrict_voters(e, members))
    return total
