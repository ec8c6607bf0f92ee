"""Approval election data model and basic structural operations.

An election is a set of candidates together with an ordered collection of
approval ballots, one per voter.  Ballots are stored as packed 64-bit
bitsets so that the pairwise kernels in :mod:`approvaldap.metrics` reduce
to word-parallel popcounts.  Elections are immutable after construction;
every operation here is pure and returns fresh objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox

__all__ = [
    "Election",
    "ElectionStats",
    "approval_score",
    "stats",
    "reverse",
    "subsample",
    "restrict_voters",
    "restrict_candidates",
]

_WORD_BITS = 64
_SUBSTREAM_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def seeded_rng(seed: int, substream: int = 0) -> Generator:
    """Counter-based RNG stream, reproducible across platforms and threads.

    Philox streams with distinct ``(seed, substream)`` keys are independent,
    so callers may draw from several substreams in any order (or in
    parallel) and still obtain identical results.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, substream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return Generator(Philox(key=key))


class Election:
    """An approval election: ``m`` candidates and ``n`` binary ballots.

    Parameters
    ----------
    ballots
        An ``(n, m)`` array-like of 0/1 entries, one row per voter.  Row
        order is significant and duplicate rows are kept with multiplicity.
    label
        Optional identifier carried through experiments and file output.
        The label is metadata: it does not participate in equality.
    """

    __slots__ = ("_m", "_words", "label", "_hash", "_scores", "_lengths", "_memo")

    def __init__(self, ballots, label: Optional[str] = None):
        mat = np.asarray(ballots)
        if mat.ndim != 2:
            raise ValueError(f"ballots must be two-dimensional, got shape {mat.shape}")
        n, m = mat.shape
        if n < 1 or m < 1:
            raise ValueError(f"election needs at least one voter and one candidate, got {n}x{m}")
        if mat.dtype != np.uint8:
            if not np.isin(mat, (0, 1)).all():
                raise ValueError("ballot entries must be 0 or 1")
            mat = mat.astype(np.uint8)
        elif mat.max(initial=0) > 1:
            raise ValueError("ballot entries must be 0 or 1")
        self._m = m
        self._words = _pack(mat)
        self.label = label
        self._hash: Optional[int] = None
        self._scores: Optional[np.ndarray] = None
        self._lengths: Optional[np.ndarray] = None
        self._memo: dict = {}

    @classmethod
    def from_approval_sets(
        cls,
        num_candidates: int,
        approval_sets: Iterable[Iterable[int]],
        label: Optional[str] = None,
    ) -> "Election":
        """Build an election from per-voter collections of approved indices."""
        rows = []
        for votes in approval_sets:
            row = np.zeros(num_candidates, dtype=np.uint8)
            idx = list(votes)
            if idx:
                arr = np.asarray(idx)
                if arr.dtype.kind not in "iu":
                    raise ValueError(f"candidate indices must be integers, got {arr.dtype}")
                if arr.min() < 0 or arr.max() >= num_candidates:
                    raise ValueError("approved candidate index out of range")
                row[arr] = 1
            rows.append(row)
        if not rows:
            raise ValueError("election needs at least one voter")
        return cls(np.stack(rows), label=label)

    @classmethod
    def _from_words(cls, num_candidates: int, words: np.ndarray, label: Optional[str]) -> "Election":
        e = cls.__new__(cls)
        e._m = num_candidates
        w = np.ascontiguousarray(words, dtype=np.uint64)
        w.setflags(write=False)
        e._words = w
        e.label = label
        e._hash = None
        e._scores = None
        e._lengths = None
        e._memo = {}
        return e

    # -- basic shape ---------------------------------------------------

    @property
    def num_candidates(self) -> int:
        return self._m

    @property
    def num_voters(self) -> int:
        return self._words.shape[0]

    @property
    def words(self) -> np.ndarray:
        """Packed ballots, shape ``(n, ceil(m/64))``, candidate ``j`` at bit ``j``."""
        return self._words

    @property
    def matrix(self) -> np.ndarray:
        """Dense ``(n, m)`` uint8 view of the ballots (fresh copy)."""
        return _unpack(self._words, self._m)

    def ballot(self, i: int) -> np.ndarray:
        """The ``i``-th ballot as a dense 0/1 vector."""
        n = self.num_voters
        if not -n <= i < n:
            raise IndexError(f"voter index {i} out of range for {n} voters")
        return _unpack(self._words[i % n : i % n + 1], self._m)[0]

    def approval_counts(self) -> np.ndarray:
        """Per-candidate approval scores ``|A(c_j)|`` as an int64 vector."""
        if self._scores is None:
            scores = self.matrix.sum(axis=0, dtype=np.int64)
            scores.setflags(write=False)
            self._scores = scores
        return self._scores

    def ballot_lengths(self) -> np.ndarray:
        """Per-voter approval counts ``|A(v_i)|`` as an int64 vector."""
        if self._lengths is None:
            lengths = np.bitwise_count(self._words).sum(axis=1, dtype=np.int64)
            lengths.setflags(write=False)
            self._lengths = lengths
        return self._lengths

    def total_approvals(self) -> int:
        return int(self.ballot_lengths().sum())

    def _cache(self, key, factory):
        # memo for derived artifacts (pair-count matrices, spectral bases);
        # lives and dies with the election, so no cross-election eviction
        try:
            return self._memo[key]
        except KeyError:
            value = factory()
            self._memo[key] = value
            return value

    # -- identity ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Election):
            return NotImplemented
        return self._m == other._m and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._m, self._words.shape[0], self._words.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"<Election{tag} m={self._m} n={self.num_voters} satr={stats(self).satr:.3f}>"


def _pack(mat: np.ndarray) -> np.ndarray:
    n, m = mat.shape
    words = -(-m // _WORD_BITS)
    packed = np.packbits(mat, axis=1, bitorder="little")
    buf = np.zeros((n, words * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    out = buf.view("<u8")
    out.setflags(write=False)
    return out


def _unpack(words: np.ndarray, m: int) -> np.ndarray:
    raw = np.ascontiguousarray(words).view("<u1")
    return np.unpackbits(raw, axis=1, bitorder="little", count=m).astype(np.uint8)


@dataclass(frozen=True)
class ElectionStats:
    """Average vote length, its complement, and the saturation ``avl/m``."""

    avl: float
    rev_avl: float
    satr: float


def approval_score(e: Election, j: int) -> int:
    """Number of voters approving candidate ``j``."""
    if not 0 <= j < e.num_candidates:
        raise IndexError(f"candidate index {j} out of range for {e.num_candidates} candidates")
    return int(e.approval_counts()[j])


def stats(e: Election) -> ElectionStats:
    """Scalar statistics of an election; satisfies ``avl + rev_avl == m``."""
    m, n = e.num_candidates, e.num_voters
    total = e.total_approvals()
    avl = total / n
    return ElectionStats(avl=avl, rev_avl=(n * m - total) / n, satr=total / (n * m))


def reverse(e: Election) -> Election:
    """Flip every entry of every ballot.  An involution."""
    m = e.num_candidates
    words = ~e.words
    # mask out the padding bits beyond candidate m-1
    tail = m % _WORD_BITS
    if tail:
        words = words.copy()
        words[:, -1] &= np.uint64((1 << tail) - 1)
    return Election._from_words(m, words, label=e.label)


def restrict_voters(e: Election, indices: Sequence[int]) -> Election:
    """Sub-election on the given voters (order preserved, duplicates allowed)."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("sub-election needs at least one voter")
    return Election._from_words(e.num_candidates, e.words[idx], label=e.label)


def restrict_candidates(e: Election, indices: Sequence[int]) -> Election:
    """Sub-election on the given candidates (order preserved)."""
    idx = list(indices)
    if not idx:
        raise ValueError("sub-election needs at least one candidate")
    return Election(e.matrix[:, idx], label=e.label)


def subsample(e: Election, max_candidates: int, max_voters: int, seed: int) -> Election:
    """Cap the election size by uniform sampling without replacement.

    Candidates (if ``m > max_candidates``) and voters (if ``n > max_voters``)
    are sampled independently with seeded streams; relative order is kept.
    Elections already within the caps are returned unchanged.
    """
    if max_candidates < 1 or max_voters < 1:
        raise ValueError("size caps must be positive")
    out = e
    if e.num_candidates > max_candidates:
        rng = seeded_rng(seed, 0xC0)
        keep = np.sort(rng.choice(e.num_candidates, size=max_candidates, replace=False))
        out = restrict_candidates(out, keep)
    if e.num_voters > max_voters:
        rng = seeded_rng(seed, 0xF0)
        keep = np.sort(rng.choice(e.num_voters, size=max_voters, replace=False))
        out = restrict_voters(out, keep)
    return out
