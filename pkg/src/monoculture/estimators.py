"""Coupled Monte Carlo estimation of utilities and condition checks.

Trials are partitioned into fixed-size chunks; chunk c uses an rng stream
derived from (seed, c) and partial sums are reduced in chunk order, so
results are bit-identical for a given seed no matter how many workers run
the chunks. Within a trial all quantities share the same draws (common
random numbers), which shrinks the variance of every estimated difference.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import CandidateDistribution, CandidatePool, PoolOrDistribution
from .exact import UtilityTable, exact_selection_pmf
from .models import RankingModelSpec, TieError, UnsupportedModelError

CHUNK_SIZE = 1 << 15
DEFAULT_Z_THRESHOLD = 3.0
DEFAULT_CONDITION_SAMPLES = 1_000_000
DEFAULT_SWEEP_SAMPLES = 100_000

VERDICT_HOLDS = "holds"
VERDICT_FAILS = "fails"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    stderr: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.stderr < 0:
            raise ValueError(f"stderr must be nonnegative, got {self.stderr}")

    @property
    def z_score_vs_zero(self) -> float:
        if self.stderr > 0:
            return self.mean / self.stderr
        if self.mean == 0:
            return 0.0
        return math.copysign(math.inf, self.mean)

    @staticmethod
    def exact(mean: float) -> "EstimateWithError":
        return EstimateWithError(float(mean), 0.0, 0)


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one behavioral-condition check.

    verdict follows the z rule: holds iff z > z_threshold, fails iff
    z < -z_threshold, inconclusive otherwise. Exact computations carry
    stderr 0 and an infinite z of the appropriate sign.
    """

    condition: str
    estimate: EstimateWithError
    verdict: str
    z_threshold: float = DEFAULT_Z_THRESHOLD
    detail: dict = field(default_factory=dict)


def _verdict(z: float, z_threshold: float) -> str:
    if z > z_threshold:
        return VERDICT_HOLDS
    if z < -z_threshold:
        return VERDICT_FAILS
    return VERDICT_INCONCLUSIVE


def _chunk_rng(seed: int, chunk_index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk_index)))


def _chunk_sizes(n_samples: int) -> list[int]:
    full, rest = divmod(n_samples, CHUNK_SIZE)
    sizes = [CHUNK_SIZE] * full
    if rest:
        sizes.append(rest)
    return sizes


def _pool_matrix(pool_or_d: PoolOrDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(pool_or_d, CandidatePool):
        return np.broadcast_to(pool_or_d.as_array(), (size, pool_or_d.n))
    if isinstance(pool_or_d, CandidateDistribution):
        return pool_or_d.sample_matrix(rng, size)
    raise TypeError(f"expected pool or distribution, got {type(pool_or_d)!r}")


def _pool_n(pool_or_d: PoolOrDistribution) -> int:
    return pool_or_d.n


def _mallows_orders(phi: float, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized repeated-insertion sampling; rows are 0-based orders."""
    q = 1.0 / phi
    out = np.zeros((size, n), dtype=np.int64)
    for j in range(1, n):
        weights = q ** np.arange(j + 1)
        cum = np.cumsum(weights)
        u = rng.uniform(0.0, cum[-1], size)
        r = np.searchsorted(cum, u, side="right")
        r = np.minimum(r, j)
        pos = (j - r)[:, None]
        idx = np.arange(j + 1)[None, :]
        src = np.clip(idx - (idx > pos), 0, j - 1)
        grown = np.take_along_axis(out[:, :j], src, axis=1)
        grown[idx == pos] = j
        out[:, : j + 1] = grown
    return out


def sample_rankings(
    spec: RankingModelSpec, pools: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One ranking per pool row, as (size, n) 0-based orders, best first.

    The distance-based family ignores the pool values; Plackett-Luce uses
    the max-trick with standard Gumbel draws; RUMs perturb values directly.
    Continuous perturbations are tie-free with probability one, so no tie
    handling happens on this path.
    """
    size, n = pools.shape
    if spec.kind == "mallows":
        return _mallows_orders(spec.phi, n, size, rng)
    if spec.kind == "plackett_luce":
        keys = spec.theta * pools + rng.gumbel(0.0, 1.0, (size, n))
    else:
        keys = pools + spec.noise.sample(rng, (size, n)) / spec.theta
    orders = np.argsort(-keys, axis=1, kind="stable")
    if spec.kind == "rum" and not spec.noise.is_continuous:
        ranked = np.take_along_axis(keys, orders, axis=1)
        tied = ranked[:, :-1] == ranked[:, 1:]
        if np.any(tied):
            row, col = np.argwhere(tied)[0]
            a, b = sorted((int(orders[row, col]) + 1, int(orders[row, col + 1]) + 1))
            raise TieError(f"perturbed scores tie candidates {a} and {b}")
    return orders


def _values_at(pools: np.ndarray, picks: np.ndarray) -> np.ndarray:
    return np.take_along_axis(pools, picks[:, None], axis=1)[:, 0]


def _top_avoiding(orders: np.ndarray, blocked: np.ndarray) -> np.ndarray:
    """Top candidate of each order, or the runner-up when the top is blocked."""
    return np.where(orders[:, 0] != blocked, orders[:, 0], orders[:, 1])


class _SumAccumulator:
    """Fixed-order accumulation of per-chunk (sum, sum of squares) pairs."""

    def __init__(self, names: tuple[str, ...], n_chunks: int):
        self.names = names
        self._partials: list[dict[str, tuple[float, float]] | None] = [None] * n_chunks
        self.n_samples = 0

    def put(self, chunk_index: int, values: dict[str, np.ndarray]) -> None:
        entry = {}
        for name in self.names:
            v = values[name]
            entry[name] = (float(v.sum()), float((v * v).sum()))
        self._partials[chunk_index] = entry

    def finalize(self, n_samples: int) -> dict[str, EstimateWithError]:
        out = {}
        for name in self.names:
            total = 0.0
            total_sq = 0.0
            for entry in self._partials:
                s, sq = entry[name]
                total += s
                total_sq += sq
            mean = total / n_samples
            var = max(total_sq / n_samples - mean * mean, 0.0)
            stderr = math.sqrt(var / n_samples) if n_samples > 1 else 0.0
            out[name] = EstimateWithError(mean, stderr, n_samples)
        return out


def _run_chunks(kernel, n_samples: int, names: tuple[str, ...], threads: int = 1):
    """Run `kernel(chunk_index, start, size)` over all chunks and reduce."""
    sizes = _chunk_sizes(n_samples)
    acc = _SumAccumulator(names, len(sizes))

    def job(args) -> None:
        index, start, size = args
        acc.put(index, kernel(index, start, size))

    tasks = []
    start = 0
    for index, size in enumerate(sizes):
        tasks.append((index, start, size))
        start += size
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(job, tasks))
    else:
        for t in tasks:
            job(t)
    return acc.finalize(n_samples)


_TABLE_NAMES = (
    "u_first_a",
    "u_first_h",
    "u_aa",
    "u_ah",
    "u_ha",
    "u_hh",
    "d_ah_aa",
    "d_hh_ah",
)


def mc_utility_trials(
    theta_a: float,
    theta_h: float,
    spec: RankingModelSpec,
    pool_or_d: PoolOrDistribution,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> dict[str, EstimateWithError]:
    """All six utility entries plus two paired differences, from shared draws.

    Per trial: one pool (fresh from D, or the fixed pool), one algorithmic
    ranking and two independent human rankings. The paired differences
    d_ah_aa and d_hh_ah are computed trial-by-trial before averaging, so
    their stderr reflects the common-random-number coupling.
    """
    if n_samples < 1:
        raise ValueError(f"need n_samples >= 1, got {n_samples}")
    spec_a = spec.with_theta(theta_a)
    spec_h = spec.with_theta(theta_h)

    def kernel(chunk_index: int, start: int, size: int) -> dict[str, np.ndarray]:
        rng = _chunk_rng(seed, chunk_index)
        pools = _pool_matrix(pool_or_d, rng, size)
        sigma = sample_rankings(spec_a, pools, rng)
        pi = sample_rankings(spec_h, pools, rng)
        tau = sample_rankings(spec_h, pools, rng)
        u_first_a = _values_at(pools, sigma[:, 0])
        u_first_h = _values_at(pools, pi[:, 0])
        u_aa = _values_at(pools, sigma[:, 1])
        u_ah = _values_at(pools, _top_avoiding(pi, sigma[:, 0]))
        u_ha = _values_at(pools, _top_avoiding(sigma, pi[:, 0]))
        u_hh = _values_at(pools, _top_avoiding(tau, pi[:, 0]))
        return {
            "u_first_a": u_first_a,
            "u_first_h": u_first_h,
            "u_aa": u_aa,
            "u_ah": u_ah,
            "u_ha": u_ha,
            "u_hh": u_hh,
            "d_ah_aa": u_ah - u_aa,
            "d_hh_ah": u_hh - u_ah,
        }

    return _run_chunks(kernel, n_samples, _TABLE_NAMES, threads)


def mc_utility_table(
    theta_a: float,
    theta_h: float,
    spec: RankingModelSpec,
    pool_or_d: PoolOrDistribution,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> UtilityTable:
    """Monte Carlo counterpart of the exact utility table."""
    est = mc_utility_trials(theta_a, theta_h, spec, pool_or_d, n_samples, seed, threads)
    return UtilityTable(
        u_first_a=est["u_first_a"].mean,
        u_first_h=est["u_first_h"].mean,
        u_aa=est["u_aa"].mean,
        u_ah=est["u_ah"].mean,
        u_ha=est["u_ha"].mean,
        u_hh=est["u_hh"].mean,
        stderr_u_first_a=est["u_first_a"].stderr,
        stderr_u_first_h=est["u_first_h"].stderr,
        stderr_u_aa=est["u_aa"].stderr,
        stderr_u_ah=est["u_ah"].stderr,
        stderr_u_ha=est["u_ha"].stderr,
        stderr_u_hh=est["u_hh"].stderr,
        n_samples=n_samples,
    )


def check_pref_first_position(
    spec: RankingModelSpec,
    theta: float,
    pool_or_d: PoolOrDistribution,
    n_samples: int = DEFAULT_CONDITION_SAMPLES,
    seed: int = 0,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    threads: int = 1,
) -> ConditionReport:
    """Estimate E[(top gap of one ranking) * 1{tops of two rankings differ}].

    Two equal-accuracy rankings are drawn per trial; the estimand is the
    unconditional product form whose sign matches the conditional
    first-position preference, and whose value equals the second mover's
    utility loss or gain from sharing the first mover's ranking.
    """
    spec_t = spec.with_theta(theta)

    def kernel(chunk_index: int, start: int, size: int) -> dict[str, np.ndarray]:
        rng = _chunk_rng(seed, chunk_index)
        pools = _pool_matrix(pool_or_d, rng, size)
        pi = sample_rankings(spec_t, pools, rng)
        sigma = sample_rankings(spec_t, pools, rng)
        gap = _values_at(pools, pi[:, 0]) - _values_at(pools, pi[:, 1])
        hit = (pi[:, 0] != sigma[:, 0]).astype(float)
        return {"estimand": gap * hit}

    est = _run_chunks(kernel, n_samples, ("estimand",), threads)["estimand"]
    return ConditionReport(
        condition="pref_first_position",
        estimate=est,
        verdict=_verdict(est.z_score_vs_zero, z_threshold),
        z_threshold=z_threshold,
        detail={"theta": theta},
    )


def check_pref_weaker_competition(
    spec: RankingModelSpec,
    theta1: float,
    theta2: float,
    pool_or_d: PoolOrDistribution,
    n_samples: int = DEFAULT_CONDITION_SAMPLES,
    seed: int = 0,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    threads: int = 1,
) -> ConditionReport:
    """Whether choosing after a weaker first mover beats a stronger one.

    Per trial one ranking pi at accuracy theta2 is scored against two
    rivals: a strong one at theta1 and a weak one at theta2. The paired
    estimand is value(top of pi avoiding the weak rival's pick) minus
    value(top of pi avoiding the strong rival's pick); positive means the
    weaker competitor leaves more on the table.
    """
    if not theta1 > theta2:
        raise ValueError(f"need theta1 > theta2, got {theta1} <= {theta2}")
    spec_strong = spec.with_theta(theta1)
    spec_weak = spec.with_theta(theta2)

    def kernel(chunk_index: int, start: int, size: int) -> dict[str, np.ndarray]:
        rng = _chunk_rng(seed, chunk_index)
        pools = _pool_matrix(pool_or_d, rng, size)
        sigma = sample_rankings(spec_strong, pools, rng)
        pi = sample_rankings(spec_weak, pools, rng)
        tau = sample_rankings(spec_weak, pools, rng)
        after_weak = _values_at(pools, _top_avoiding(pi, tau[:, 0]))
        after_strong = _values_at(pools, _top_avoiding(pi, sigma[:, 0]))
        return {"estimand": after_weak - after_strong}

    est = _run_chunks(kernel, n_samples, ("estimand",), threads)["estimand"]
    return ConditionReport(
        condition="pref_weaker_competition",
        estimate=est,
        verdict=_verdict(est.z_score_vs_zero, z_threshold),
        z_threshold=z_threshold,
        detail={"theta1": theta1, "theta2": theta2},
    )


def _mc_selection_mean(
    spec: RankingModelSpec,
    pool_or_d: PoolOrDistribution,
    removed: frozenset[int],
    n_samples: int,
    seed: int,
    stream: int,
    threads: int = 1,
) -> EstimateWithError:
    removed0 = np.array(sorted(c - 1 for c in removed), dtype=np.int64)

    def kernel(chunk_index: int, start: int, size: int) -> dict[str, np.ndarray]:
        rng = _chunk_rng(seed, chunk_index, stream)
        pools = _pool_matrix(pool_or_d, rng, size)
        orders = sample_rankings(spec, pools, rng)
        if removed0.size:
            alive = ~np.isin(orders, removed0)
            first = np.argmax(alive, axis=1)
            picks = np.take_along_axis(orders, first[:, None], axis=1)[:, 0]
        else:
            picks = orders[:, 0]
        return {"estimand": _values_at(pools, picks)}

    return _run_chunks(kernel, n_samples, ("estimand",), threads)["estimand"]


def check_monotonicity(
    spec: RankingModelSpec,
    theta_grid,
    removed: frozenset[int] | set[int],
    pool: PoolOrDistribution,
    n_samples: int = DEFAULT_CONDITION_SAMPLES,
    seed: int = 0,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    threads: int = 1,
) -> ConditionReport:
    """Whether the expected top surviving value increases with accuracy.

    Evaluates E[value of best survivor] on the accuracy grid, exactly when
    the model admits enumeration and by Monte Carlo otherwise, and examines
    consecutive differences. The reported estimate is the worst difference
    by z-score; a one-point grid holds trivially.
    """
    grid = [float(t) for t in theta_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"theta grid must be increasing, got {grid}")
    removed = frozenset(int(c) for c in removed)
    n = _pool_n(pool)
    if len(removed) >= n:
        raise ValueError("cannot remove every candidate")

    means: list[EstimateWithError] = []
    exact_mode = True
    try:
        if isinstance(pool, CandidateDistribution) and pool.kind != "fixed":
            if not spec.value_independent:
                raise UnsupportedModelError("value-dependent model over a pool distribution")
            fixed = pool.mean_pool()
        elif isinstance(pool, CandidateDistribution):
            fixed = CandidatePool(pool.fixed_values)
        else:
            fixed = pool
        x = fixed.as_array()
        for t in grid:
            pmf = exact_selection_pmf(spec.with_theta(t), fixed, removed)
            means.append(EstimateWithError.exact(pmf.expectation(x)))
    except UnsupportedModelError:
        exact_mode = False
        means = [
            _mc_selection_mean(
                spec.with_theta(t), pool, removed, n_samples, seed, stream=i, threads=threads
            )
            for i, t in enumerate(grid)
        ]

    detail = {
        "theta_grid": tuple(grid),
        "removed": tuple(sorted(removed)),
        "means": tuple(m.mean for m in means),
        "stderrs": tuple(m.stderr for m in means),
        "exact": exact_mode,
    }
    if len(grid) == 1:
        report_estimate = EstimateWithError.exact(0.0) if exact_mode else means[0]
        return ConditionReport(
            condition="monotonicity",
            estimate=EstimateWithError(0.0, 0.0, report_estimate.n_samples),
            verdict=VERDICT_HOLDS,
            z_threshold=z_threshold,
            detail=detail,
        )

    worst: EstimateWithError | None = None
    for a, b in zip(means, means[1:]):
        diff = b.mean - a.mean
        stderr = math.hypot(a.stderr, b.stderr)
        est = EstimateWithError(diff, stderr, max(a.n_samples, b.n_samples))
        if worst is None or est.z_score_vs_zero < worst.z_score_vs_zero:
            worst = est
    return ConditionReport(
        condition="monotonicity",
        estimate=worst,
        verdict=_verdict(worst.z_score_vs_zero, z_threshold),
        z_threshold=z_threshold,
        detail=detail,
    )
