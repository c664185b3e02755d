"""Exact selection probabilities, utility tables, and sequential hiring.

All computations here enumerate the permutation distribution (or, for
k-firm hiring, run a removed-set recursion against it), so they are exact
up to float rounding. Sizes are capped: n <= 8 for selection pmfs, n <= 7
for utility tables and sequential hiring, n <= 3 for continuous-noise
models whose permutation probabilities come from quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .core import (
    CandidatePool,
    CandidateDistribution,
    PoolOrDistribution,
)
from .models import (
    NoiseSpec,
    RankingModelSpec,
    TieError,
    UnsupportedModelError,
    mallows_perm_probs,
)
from .permspace import PermSpace, mask_of, perm_space

MAX_TABLE_N = 7
MAX_PMF_N = 8
MAX_QUADRATURE_N = 3
_DISCRETE_SUPPORT_CAP = 2_000_000

ENTRY_NAMES = ("u_first_a", "u_first_h", "u_aa", "u_ah", "u_ha", "u_hh")


@dataclass(frozen=True)
class UtilityTable:
    """First-mover and second-mover expected utilities for one (A, H) pair.

    u_first_a / u_first_h are the utilities of moving first with the
    algorithmic / human ranking; u_xy is the second mover's utility when
    the first mover played x and the second plays y. stderr_* fields are
    zero for exact computation.
    """

    u_first_a: float
    u_first_h: float
    u_aa: float
    u_ah: float
    u_ha: float
    u_hh: float
    stderr_u_first_a: float = 0.0
    stderr_u_first_h: float = 0.0
    stderr_u_aa: float = 0.0
    stderr_u_ah: float = 0.0
    stderr_u_ha: float = 0.0
    stderr_u_hh: float = 0.0
    n_samples: int = 0

    def entry(self, name: str) -> float:
        if name not in ENTRY_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def stderr(self, name: str) -> float:
        if name not in ENTRY_NAMES:
            raise KeyError(name)
        return getattr(self, "stderr_" + name)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in ENTRY_NAMES}


@dataclass(frozen=True)
class SelectionPmf:
    """Pmf of the top surviving candidate; removed entries are zero."""

    probs: tuple[float, ...]
    removed: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "removed", frozenset(int(c) for c in self.removed))
        if any(p < 0 for p in self.probs):
            raise ValueError(f"negative probability in {self.probs}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(self.probs)!r}")
        if any(self.probs[c - 1] != 0.0 for c in self.removed):
            raise ValueError("removed candidates must carry zero probability")

    @property
    def n(self) -> int:
        return len(self.probs)

    def prob_of(self, candidate: int) -> float:
        return self.probs[candidate - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)

    def expectation(self, values: np.ndarray) -> float:
        return float(self.as_array() @ np.asarray(values))


def permutation_probabilities(spec: RankingModelSpec, pool: CandidatePool) -> np.ndarray:
    """Exact pmf over all n! rankings, aligned with permspace row order.

    Supported: the distance-based family (any pool, value-independent),
    Plackett-Luce, discrete-noise RUMs (joint atom enumeration), and
    continuous-noise RUMs up to n = 3 (1-D quadrature).
    """
    n = pool.n
    if spec.kind == "mallows":
        return mallows_perm_probs(spec.phi, n)
    if spec.kind == "plackett_luce":
        return _pl_perm_probs(spec.theta, pool.as_array())
    if spec.noise.kind == "discrete":
        return _discrete_rum_perm_probs(spec.noise, spec.theta, pool.as_array())
    if n > MAX_QUADRATURE_N:
        raise UnsupportedModelError(
            f"continuous-noise models are exact only up to n={MAX_QUADRATURE_N}; "
            "use the estimators module for larger pools"
        )
    return _continuous_rum_perm_probs(spec.noise, spec.theta, pool.as_array())


def _pl_perm_probs(theta: float, x: np.ndarray) -> np.ndarray:
    space = perm_space(len(x))
    scores = theta * x
    w = np.exp(scores - scores.max())
    picked = w[space.perms]
    remaining = np.cumsum(picked[:, ::-1], axis=1)[:, ::-1]
    return np.prod(picked / remaining, axis=1)


def _discrete_rum_perm_probs(noise: NoiseSpec, theta: float, x: np.ndarray) -> np.ndarray:
    n = len(x)
    space = perm_space(n)
    values = np.array([v for v, _ in noise.atoms])
    probs = np.array([p for _, p in noise.atoms])
    m = len(values)
    if m**n > _DISCRETE_SUPPORT_CAP:
        raise UnsupportedModelError(f"joint atom support {m}^{n} too large")
    grids = np.meshgrid(*([np.arange(m)] * n), indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=1)
    perturbed = x[None, :] + values[combos] / theta
    order = np.argsort(-perturbed, axis=1, kind="stable")
    ranked = np.take_along_axis(perturbed, order, axis=1)
    tied = ranked[:, :-1] == ranked[:, 1:]
    if tied.any():
        row, col = np.argwhere(tied)[0]
        raise TieError(
            f"candidates {order[row, col] + 1} and {order[row, col + 1] + 1} "
            f"tie at perturbed value {ranked[row, col]!r}"
        )
    rows = space.rows_of(order)
    joint = np.prod(probs[combos], axis=1)
    return np.bincount(rows, weights=joint, minlength=space.size)


def _continuous_rum_perm_probs(noise: NoiseSpec, theta: float, x: np.ndarray) -> np.ndarray:
    n = len(x)
    space = perm_space(n)

    def pdf(c: int, t: float) -> float:
        return theta * float(noise.pdf((t - x[c]) * theta))

    def cdf(c: int, t: float) -> float:
        return float(noise.cdf((t - x[c]) * theta))

    probs = np.empty(space.size)
    for row, perm in enumerate(space.perms):
        if n == 2:
            a, b = perm
            val, _ = integrate.quad(
                lambda t: pdf(b, t) * (1.0 - cdf(a, t)),
                -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=300,
            )
        else:
            a, b, c = perm
            val, _ = integrate.quad(
                lambda t: pdf(b, t) * (1.0 - cdf(a, t)) * cdf(c, t),
                -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=300,
            )
        probs[row] = val
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise UnsupportedModelError(f"quadrature pmf sums to {total!r}")
    return probs / total


def exact_selection_pmf(
    spec: RankingModelSpec,
    pool: CandidatePool,
    removed: frozenset[int] | set[int] = frozenset(),
) -> SelectionPmf:
    """Pmf of the best-ranked surviving candidate after removing a set."""
    n = pool.n
    if n > MAX_PMF_N:
        raise UnsupportedModelError(f"exact selection pmf capped at n={MAX_PMF_N}")
    removed = frozenset(int(c) for c in removed)
    if not removed <= set(range(1, n + 1)):
        raise ValueError(f"removed {sorted(removed)} out of range 1..{n}")
    if len(removed) >= n:
        raise ValueError("cannot remove every candidate")
    probs = permutation_probabilities(spec, pool)
    space = perm_space(n)
    pmf = space.first_choice(probs, mask_of({c - 1 for c in removed}))
    pmf = pmf / pmf.sum()
    return SelectionPmf(tuple(pmf), removed)


def _second_mover_kernel(space: PermSpace, probs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """G[c] = expected value obtained by an independent ranking when its
    top pick collides with an already-removed candidate c (take the runner-up)."""
    first = space.perms[:, 0]
    second = space.perms[:, 1]
    n = space.n
    g = np.empty(n)
    first_vals = x[first]
    second_vals = x[second]
    for c in range(n):
        picks = np.where(first == c, second_vals, first_vals)
        g[c] = probs @ picks
    return g


def _resolve_exact_values(pool_or_d: PoolOrDistribution, value_independent: bool) -> np.ndarray:
    if isinstance(pool_or_d, CandidatePool):
        return pool_or_d.as_array()
    if isinstance(pool_or_d, CandidateDistribution):
        if pool_or_d.kind == "fixed":
            return np.asarray(pool_or_d.fixed_values)
        if not value_independent:
            raise UnsupportedModelError(
                "exact expectations over a pool distribution need a value-independent "
                "model; use the estimators module"
            )
        return pool_or_d.mean_pool().as_array()
    raise TypeError(f"expected pool or distribution, got {type(pool_or_d)!r}")


def exact_utility_table(
    theta_a: float,
    theta_h: float,
    family: RankingModelSpec,
    pool: PoolOrDistribution,
) -> UtilityTable:
    """All six expected utilities of the two-firm hiring interaction.

    The first mover takes the top of its ranking; the second mover takes
    the top remaining candidate of its own ranking. Matching strategies
    (AA) share one realized ranking; every other pairing draws independent
    rankings. The first mover influences an independent second mover only
    through the identity of its first pick, so the cross terms reduce to a
    first-pick pmf contracted against a second-mover kernel; tests verify
    this against the raw double enumeration over ranking pairs.
    """
    spec_a = family.with_theta(theta_a)
    spec_h = family.with_theta(theta_h)
    x = _resolve_exact_values(pool, family.value_independent)
    n = len(x)
    if n > MAX_TABLE_N:
        raise UnsupportedModelError(f"exact utility table capped at n={MAX_TABLE_N}")
    fixed_pool = CandidatePool(tuple(x))
    p_a = permutation_probabilities(spec_a, fixed_pool)
    p_h = permutation_probabilities(spec_h, fixed_pool)
    space = perm_space(n)
    first = space.perms[:, 0]
    second = space.perms[:, 1]

    pr_a1 = np.bincount(first, weights=p_a, minlength=n)
    pr_h1 = np.bincount(first, weights=p_h, minlength=n)
    u_first_a = float(pr_a1 @ x)
    u_first_h = float(pr_h1 @ x)
    u_aa = float(p_a @ x[second])
    g_h = _second_mover_kernel(space, p_h, x)
    g_a = _second_mover_kernel(space, p_a, x)
    return UtilityTable(
        u_first_a=u_first_a,
        u_first_h=u_first_h,
        u_aa=u_aa,
        u_ah=float(pr_a1 @ g_h),
        u_ha=float(pr_h1 @ g_a),
        u_hh=float(pr_h1 @ g_h),
    )


def identity_check_uah_uaa(
    theta_a: float,
    theta_h: float,
    spec: RankingModelSpec,
    pool: CandidatePool,
) -> float:
    """Residual of the equal-accuracy identity
    u_AH - u_AA = E[(value of first pick - value of second pick) * 1{picks collide not}].

    The right side is the expected first-vs-second pick gap of the second
    mover's ranking, counted only when its top pick survives the first
    mover. Requires theta_a = theta_h; returns |LHS - RHS|.
    """
    if theta_a != theta_h:
        raise ValueError("the identity is an equal-accuracy statement; need theta_a = theta_h")
    table = exact_utility_table(theta_a, theta_h, spec, pool)
    lhs = table.u_ah - table.u_aa

    x = _resolve_exact_values(pool, spec.value_independent)
    fixed_pool = CandidatePool(tuple(x))
    spec_t = spec.with_theta(theta_a)
    probs = permutation_probabilities(spec_t, fixed_pool)
    space = perm_space(len(x))
    first = space.perms[:, 0]
    second = space.perms[:, 1]
    pr_first = np.bincount(first, weights=probs, minlength=len(x))
    gap = x[first] - x[second]
    rhs = float(probs @ (gap * (1.0 - pr_first[first])))
    return abs(lhs - rhs)


def exact_welfare(table: UtilityTable, profile: str) -> float:
    """Total welfare (both firms' utility) for a strategy profile.

    AA and HH sum the first-mover and matching second-mover entries; the
    mixed profile averages the two hiring orders with weight 1/2 each.
    """
    p = profile.upper()
    if p == "AA":
        return table.u_first_a + table.u_aa
    if p == "HH":
        return table.u_first_h + table.u_hh
    if p in ("AH", "HA"):
        return 0.5 * (table.u_first_a + table.u_ah) + 0.5 * (table.u_first_h + table.u_ha)
    raise ValueError(f"unknown profile {profile!r}")


class MallowsSubsetPicker:
    """Cached first-choice pmfs over survivor sets for one dispersion phi."""

    def __init__(self, phi: float, n: int):
        self.phi = phi
        self.n = n
        self.space = perm_space(n)
        self.probs = mallows_perm_probs(phi, n)
        self._cache: dict[int, np.ndarray] = {}

    def first_choice(self, removed_mask: int) -> np.ndarray:
        pmf = self._cache.get(removed_mask)
        if pmf is None:
            pmf = self.space.first_choice(self.probs, removed_mask)
            total = pmf.sum()
            pmf = pmf / total
            self._cache[removed_mask] = pmf
        return pmf


@lru_cache(maxsize=64)
def _subset_picker(phi: float, n: int) -> MallowsSubsetPicker:
    return MallowsSubsetPicker(phi, n)


class SequentialState:
    """Forward state of the k-firm hiring recursion.

    Mass is tracked jointly over (removed set, shared algorithmic ranking):
    firms playing A consume the top surviving entry of the shared ranking,
    while each firm playing H draws a fresh ranking, which integrates out
    to a survivor-set first-choice pmf.
    """

    def __init__(self, phi_a: float, phi_h: float, x: np.ndarray):
        self.n = len(x)
        self.x = x
        self.space = perm_space(self.n)
        self.p_a = mallows_perm_probs(phi_a, self.n)
        self.picker_h = _subset_picker(phi_h, self.n)
        self.masses: dict[int, np.ndarray] = {0: self.p_a.copy()}
        self.hired = 0

    def utility_of_next(self, strategy: str) -> float:
        total = 0.0
        for mask, vec in self.masses.items():
            if strategy == "A":
                tops = self.space.top_of_available(mask)
                total += float(vec @ self.x[tops])
            else:
                q = self.picker_h.first_choice(mask)
                total += float(vec.sum() * (q @ self.x))
        return total

    def hire(self, strategy: str) -> None:
        if self.hired >= self.n:
            raise UnsupportedModelError("no candidates left to hire")
        nxt: dict[int, np.ndarray] = {}
        for mask, vec in self.masses.items():
            if strategy == "A":
                tops = self.space.top_of_available(mask)
                for c in np.unique(tops):
                    sel = tops == c
                    key = mask | (1 << int(c))
                    acc = nxt.get(key)
                    contrib = np.where(sel, vec, 0.0)
                    nxt[key] = contrib if acc is None else acc + contrib
            else:
                q = self.picker_h.first_choice(mask)
                for c in range(self.n):
                    if q[c] <= 0.0:
                        continue
                    key = mask | (1 << c)
                    acc = nxt.get(key)
                    contrib = q[c] * vec
                    nxt[key] = contrib if acc is None else acc + contrib
        self.masses = nxt
        self.hired += 1


def _validate_sequence(sequence) -> tuple[str, ...]:
    seq = tuple(str(s).upper() for s in sequence)
    if not seq or any(s not in ("A", "H") for s in seq):
        raise ValueError(f"sequence must be nonempty over A/H, got {sequence!r}")
    return seq


def exact_sequential_utilities(
    sequence,
    phi_a: float,
    phi_h: float,
    pool_or_d: PoolOrDistribution,
) -> list[float]:
    """Per-firm expected utilities when firms hire in the given order.

    Firms take the best surviving candidate of their ranking: one shared
    ranking for all A-firms, independent fresh rankings for H-firms. Only
    the distance-based family is supported; pool distributions enter
    through expected order statistics (the ranking distribution does not
    depend on the values).
    """
    seq = _validate_sequence(sequence)
    if not (phi_a > 1 and phi_h > 1):
        raise UnsupportedModelError(f"need phi > 1, got phi_a={phi_a}, phi_h={phi_h}")
    x = _resolve_exact_values(pool_or_d, value_independent=True)
    n = len(x)
    if n > MAX_TABLE_N:
        raise UnsupportedModelError(f"sequential hiring capped at n={MAX_TABLE_N}")
    if len(seq) > n:
        raise UnsupportedModelError(f"{len(seq)} firms cannot hire from {n} candidates")
    state = SequentialState(phi_a, phi_h, x)
    utilities = []
    for strategy in seq:
        utilities.append(state.utility_of_next(strategy))
        state.hire(strategy)
    return utilities
