"""Agreement indices: six maps from an election to [0, 1].

Global indices (approval, central, Hamming-pairwise and PCC-pairwise
agreement) measure whether all voters hold similar views; the local ones
(Jaccard and PCC+ pairwise agreement) also reward large internally
agreeing groups.  Every index gives 1 exactly on identity elections,
where all ballots coincide.

Degenerate elections -- saturation 0 or 1, which forces all ballots to be
equal -- are identity elections, so the indices whose normalization would
vanish there return 1 by convention.

Integer accumulators are used throughout so that the two formulations of
Hamming-pairwise agreement (the quadratic sum and its per-candidate
rearrangement) and of central agreement produce bit-identical floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Election
from .metrics import hamming_matrix, jaccard_similarity_matrix, pcc_matrix

__all__ = [
    "CentralVote",
    "av_agr",
    "central_vote",
    "cntr_agr",
    "cntr_agr_closed_form",
    "pair_agr",
    "pair_agr_naive",
    "jacc_agr",
    "pcc_agr",
    "pccplus_agr",
    "AGREEMENT_INDICES",
]

_PCC_RESIDUE = 1e-9


@dataclass(frozen=True)
class CentralVote:
    """A ballot agreeing with at least half the voters on every candidate.

    ``chd`` is the sum of Hamming distances from the central ballot to all
    ballots of the election; it is the same for every central vote.
    """

    ballot: np.ndarray
    chd: int


def av_agr(e: Election) -> float:
    """Approval agreement: mean over candidates of ``|1 - 2|A(c)|/n|``."""
    scores = e.approval_counts()
    n, m = e.num_voters, e.num_candidates
    total = int(np.abs(n - 2 * scores).sum())
    return total / (n * m)


def central_vote(e: Election) -> CentralVote:
    """The canonical central vote (ties at ``n/2`` resolve to disapprove)."""
    scores = e.approval_counts()
    n = e.num_voters
    ballot = (2 * scores > n).astype(np.uint8)
    ballot.setflags(write=False)
    # summing per candidate: each contributes min(|A(c)|, n - |A(c)|)
    chd = int(np.minimum(scores, n - scores).sum())
    return CentralVote(ballot=ballot, chd=chd)


def _min_side(e: Election) -> int:
    # n * min(avl, rev_avl) as an exact integer
    total = e.total_approvals()
    return min(total, e.num_voters * e.num_candidates - total)


def cntr_agr(e: Election) -> float:
    """Central agreement: 1 minus chd normalized by ``n * min(avl, rev_avl)``."""
    denom = _min_side(e)
    if denom == 0:
        return 1.0
    return 1.0 - central_vote(e).chd / denom


def cntr_agr_closed_form(e: Election) -> float:
    """Per-candidate form of :func:`cntr_agr`; equal to it exactly.

    Serves as an O(nm) cross-check of the distance-based definition.
    Raises on degenerate saturation, where the normalization vanishes.
    """
    denom = _min_side(e)
    if denom == 0:
        raise ValueError("central agreement closed form undefined at saturation 0 or 1")
    scores = e.approval_counts()
    n = e.num_voters
    numer = int((n - np.abs(n - 2 * scores)).sum())
    return 1.0 - numer / (2 * denom)


def pair_agr(e: Election) -> float:
    """Hamming pairwise agreement via the per-candidate rearrangement.

    Evaluates ``1 - sum_c |A(c)|(n-|A(c)|) / (n^2 m satr (1-satr))`` in
    O(nm); equals the quadratic definition exactly.
    """
    n, m = e.num_voters, e.num_candidates
    total = e.total_approvals()
    if total in (0, n * m):
        return 1.0
    scores = e.approval_counts()
    pair_sum = int((scores * (n - scores)).sum())
    # n^2 m satr(1-satr) == total * (nm - total) / m
    return 1.0 - (pair_sum * m) / (total * (n * m - total))


def pair_agr_naive(e: Election) -> float:
    """Hamming pairwise agreement summed over all ordered ballot pairs.

    The O(n^2 m) reference form; kept as an oracle for :func:`pair_agr`.
    """
    n, m = e.num_voters, e.num_candidates
    total = e.total_approvals()
    if total in (0, n * m):
        raise ValueError("pairwise agreement sum undefined at saturation 0 or 1")
    ham_sum = int(hamming_matrix(e).sum())
    return 1.0 - (ham_sum * m) / (2 * total * (n * m - total))


def jacc_agr(e: Election) -> float:
    """Mean Jaccard similarity over all ordered ballot pairs (self-pairs included)."""
    return float(jaccard_similarity_matrix(e).mean())


def pcc_agr(e: Election) -> float:
    """Mean PCC over all ordered ballot pairs; nonnegative up to float residue."""
    value = float(pcc_matrix(e).mean())
    if -_PCC_RESIDUE < value < 0.0:
        return 0.0
    return value


def pccplus_agr(e: Election) -> float:
    """Mean of ``max(0, pcc)`` over all ordered ballot pairs."""
    return float(np.maximum(pcc_matrix(e), 0.0).mean())


AGREEMENT_INDICES = {
    "av_agr": av_agr,
    "cntr_agr": cntr_agr,
    "pair_agr": pair_agr,
    "jacc_agr": jacc_agr,
    "pcc_agr": pcc_agr,
    "pccplus_agr": pccplus_agr,
}
