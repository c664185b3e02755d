"""Candidate pools, permutations, and partial rankings.

Conventions used across the package: candidates are indexed 1..n with
index i denoting the i-th best candidate, so pool values are strictly
decreasing in the index. Rankings list candidate indices best-first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np


class PoolError(ValueError):
    """Raised for malformed candidate pools or distributions."""


class RankingError(ValueError):
    """Raised for malformed permutations or partial rankings."""


@dataclass(frozen=True)
class CandidatePool:
    """Fixed candidate values, strictly decreasing, at least two of them."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise PoolError(f"need at least 2 candidates, got {len(vals)}")
        for a, b in zip(vals, vals[1:]):
            if not a > b:
                raise PoolError(f"values must be strictly decreasing, got {a} then {b}")

    @property
    def n(self) -> int:
        return len(self.values)

    def value_of(self, candidate: int) -> float:
        """Value of 1-based candidate index."""
        if not 1 <= candidate <= len(self.values):
            raise PoolError(f"candidate {candidate} out of range 1..{len(self.values)}")
        return self.values[candidate - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def uniform_order_statistic_means(n: int, lo: float, hi: float) -> tuple[float, ...]:
    """Expected order statistics of n iid uniform(lo, hi) draws, best first.

    The i-th best of n has mean lo + (hi - lo) * (n + 1 - i) / (n + 1).
    """
    if n < 2:
        raise PoolError(f"need n >= 2, got {n}")
    if not hi > lo:
        raise PoolError(f"need hi > lo, got [{lo}, {hi}]")
    return tuple(lo + (hi - lo) * (n + 1 - i) / (n + 1) for i in range(1, n + 1))


@dataclass(frozen=True)
class CandidateDistribution:
    """Distribution over candidate pools: fixed values or iid uniform draws.

    kind is one of "fixed", "uniform" (params lo, hi) or
    "uniform_centered_zero" (param halfwidth). Sampling sorts the draws
    descending and redraws on the zero-probability event of a tie.
    """

    kind: str
    n: int
    params: tuple[float, ...] = field(default=())
    fixed_values: tuple[float, ...] | None = None

    _KINDS = ("fixed", "uniform", "uniform_centered_zero")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise PoolError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "fixed":
            if self.fixed_values is None:
                raise PoolError("fixed kind needs values")
        elif self.kind == "uniform":
            lo, hi = self.params
            if not hi > lo:
                raise PoolError(f"need hi > lo, got [{lo}, {hi}]")
        else:
            (halfwidth,) = self.params
            if not halfwidth > 0:
                raise PoolError(f"need halfwidth > 0, got {halfwidth}")
        if self.n < 2:
            raise PoolError(f"need n >= 2, got {self.n}")

    @staticmethod
    def fixed(values: Iterable[float]) -> "CandidateDistribution":
        pool = CandidatePool(tuple(values))
        return CandidateDistribution("fixed", pool.n, fixed_values=pool.values)

    @staticmethod
    def uniform(lo: float, hi: float, n: int) -> "CandidateDistribution":
        return CandidateDistribution("uniform", n, (float(lo), float(hi)))

    @staticmethod
    def uniform_centered_zero(halfwidth: float, n: int) -> "CandidateDistribution":
        return CandidateDistribution("uniform_centered_zero", n, (float(halfwidth),))

    @property
    def bounds(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return self.params[0], self.params[1]
        if self.kind == "uniform_centered_zero":
            h = self.params[0]
            return -h, h
        vals = self.fixed_values
        return vals[-1], vals[0]

    def sample(self, rng: np.random.Generator) -> CandidatePool:
        return CandidatePool(tuple(self.sample_matrix(rng, 1)[0]))

    def sample_matrix(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, n) array of pools, each row sorted descending."""
        if self.kind == "fixed":
            return np.tile(np.asarray(self.fixed_values), (size, 1))
        lo, hi = self.bounds
        draws = rng.uniform(lo, hi, size=(size, self.n))
        draws = -np.sort(-draws, axis=1)
        # ties have probability zero but the contract says resample them
        bad = np.any(draws[:, :-1] == draws[:, 1:], axis=1)
        while np.any(bad):
            redraw = rng.uniform(lo, hi, size=(int(bad.sum()), self.n))
            draws[bad] = -np.sort(-redraw, axis=1)
            bad = np.any(draws[:, :-1] == draws[:, 1:], axis=1)
        return draws

    def mean_pool(self) -> CandidatePool:
        """Pool of expected order statistics (the fixed values for kind fixed)."""
        if self.kind == "fixed":
            return CandidatePool(self.fixed_values)
        lo, hi = self.bounds
        return CandidatePool(uniform_order_statistic_means(self.n, lo, hi))


PoolOrDistribution = Union[CandidatePool, CandidateDistribution]


@dataclass(frozen=True)
class Permutation:
    """Full ranking: a bijection on {1..n}, best-ranked candidate first."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(c) for c in self.order)
        object.__setattr__(self, "order", order)
        n = len(order)
        if n < 1 or sorted(order) != list(range(1, n + 1)):
            raise RankingError(f"not a bijection on 1..{n}: {order}")

    @property
    def n(self) -> int:
        return len(self.order)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(1, n + 1)))

    def rank_of(self, candidate: int) -> int:
        """1-based position of a candidate in this ranking."""
        return self.order.index(candidate) + 1


@dataclass(frozen=True)
class PartialRanking:
    """A ranking with some candidates removed; order and removed partition 1..n."""

    order: tuple[int, ...]
    removed: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(int(c) for c in self.order))
        object.__setattr__(self, "removed", frozenset(int(c) for c in self.removed))
        n = len(self.order) + len(self.removed)
        seen = set(self.order) | self.removed
        if len(self.order) < 1:
            raise RankingError("partial ranking must keep at least one candidate")
        if len(seen) != n or seen != set(range(1, n + 1)):
            raise RankingError(
                f"order {self.order} and removed {sorted(self.removed)} "
                f"do not partition 1..{n}"
            )

    @property
    def n(self) -> int:
        return len(self.order) + len(self.removed)

    @property
    def top(self) -> int:
        return self.order[0]


def kendall_tau(pi: Permutation, sigma: Permutation) -> int:
    """Number of candidate pairs the two rankings order differently."""
    if pi.n != sigma.n:
        raise RankingError(f"size mismatch: {pi.n} vs {sigma.n}")
    n = pi.n
    pos_pi = {c: r for r, c in enumerate(pi.order)}
    pos_sigma = {c: r for r, c in enumerate(sigma.order)}
    count = 0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (pos_pi[i] - pos_pi[j]) * (pos_sigma[i] - pos_sigma[j]) < 0:
                count += 1
    return count


def remove_candidates(pi: Permutation, removed: Iterable[int]) -> PartialRanking:
    """Delete the given candidates from a ranking, keeping the rest in order.

    Removal happens after the ranking is realized; the survivors keep their
    relative order, which is not the same as ranking the survivors alone.
    """
    removed_set = frozenset(int(c) for c in removed)
    if not removed_set <= set(pi.order):
        raise RankingError(f"removed {sorted(removed_set)} not a subset of candidates")
    if len(removed_set) >= pi.n:
        raise RankingError("cannot remove every candidate")
    kept = tuple(c for c in pi.order if c not in removed_set)
    return PartialRanking(kept, removed_set)


def top_value(pr: PartialRanking, pool: CandidatePool) -> float:
    """Pool value of the best-ranked surviving candidate."""
    if pr.n != pool.n:
        raise RankingError(f"size mismatch: ranking on {pr.n}, pool of {pool.n}")
    return pool.value_of(pr.top)
