"""Pools, distributions, rankings, and the Kendall tau distance."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from monoculture import (
    CandidateDistribution,
    CandidatePool,
    PartialRanking,
    Permutation,
    PoolError,
    RankingError,
    kendall_tau,
    remove_candidates,
    top_value,
    uniform_order_statistic_means,
)


def test_pool_requires_strictly_decreasing_values():
    CandidatePool((3.0, 2.0, 0.0))
    with pytest.raises(PoolError):
        CandidatePool((1.0, 1.0, 0.0))
    with pytest.raises(PoolError):
        CandidatePool((0.0, 1.0))
    with pytest.raises(PoolError):
        CandidatePool((1.0,))


def test_pool_lookup_is_one_based():
    pool = CandidatePool((1.75, 0.5, 0.0))
    assert pool.n == 3
    assert pool.value_of(1) == 1.75
    assert pool.value_of(3) == 0.0
    with pytest.raises(PoolError):
        pool.value_of(0)
    with pytest.raises(PoolError):
        pool.value_of(4)


def test_pool_array_is_a_copy():
    pool = CandidatePool((1.0, 0.5, 0.0))
    arr = pool.as_array()
    arr[0] = 99.0
    assert pool.value_of(1) == 1.0


def test_uniform_order_statistic_means_closed_form():
    # E[X_(k)] for uniform[lo, hi] is lo + (hi - lo) * k / (n + 1), best first
    got = uniform_order_statistic_means(4, 0.0, 1.0)
    assert np.allclose(got, (4 / 5, 3 / 5, 2 / 5, 1 / 5), atol=1e-15)
    got = uniform_order_statistic_means(3, -2.0, 2.0)
    assert np.allclose(got, (1.0, 0.0, -1.0), atol=1e-15)


def test_distribution_mean_pool_matches_order_statistics():
    d = CandidateDistribution.uniform(0.0, 1.0, 6)
    assert np.allclose(d.mean_pool().as_array(), uniform_order_statistic_means(6, 0.0, 1.0))
    d0 = CandidateDistribution.uniform_centered_zero(math.sqrt(3.0), 3)
    lo, hi = d0.bounds
    assert lo == -math.sqrt(3.0) and hi == math.sqrt(3.0)
    assert abs(d0.mean_pool().value_of(2)) < 1e-15


def test_distribution_samples_sorted_and_in_bounds():
    d = CandidateDistribution.uniform(-1.0, 2.0, 5)
    rng = np.random.default_rng(7)
    mat = d.sample_matrix(rng, 500)
    assert mat.shape == (500, 5)
    assert (np.diff(mat, axis=1) < 0).all()
    assert mat.min() >= -1.0 and mat.max() <= 2.0


def test_fixed_distribution_repeats_its_pool():
    d = CandidateDistribution.fixed((1.0, 0.5, 0.0))
    rng = np.random.default_rng(0)
    mat = d.sample_matrix(rng, 3)
    assert np.allclose(mat, [[1.0, 0.5, 0.0]] * 3)
    assert d.mean_pool().as_array().tolist() == [1.0, 0.5, 0.0]


def test_permutation_validation():
    Permutation((2, 1, 3))
    with pytest.raises(RankingError):
        Permutation((1, 1, 2))
    with pytest.raises(RankingError):
        Permutation((0, 1, 2))
    assert Permutation.identity(4).order == (1, 2, 3, 4)
    assert Permutation((3, 1, 2)).rank_of(3) == 1


def test_kendall_tau_known_values():
    ident = Permutation.identity(4)
    assert kendall_tau(ident, ident) == 0
    assert kendall_tau(ident, Permutation((4, 3, 2, 1))) == 6
    assert kendall_tau(ident, Permutation((2, 1, 3, 4))) == 1
    with pytest.raises(RankingError):
        kendall_tau(ident, Permutation.identity(3))


@st.composite
def permutations_of(draw, n):
    order = list(range(1, n + 1))
    return Permutation(tuple(draw(st.permutations(order))))


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(permutations_of(n), permutations_of(n))))
def test_kendall_tau_is_a_symmetric_bounded_metric(pair):
    pi, sigma = pair
    d = kendall_tau(pi, sigma)
    assert 0 <= d <= pi.n * (pi.n - 1) // 2
    assert d == kendall_tau(sigma, pi)
    assert (d == 0) == (pi.order == sigma.order)


@given(st.integers(2, 5).flatmap(
    lambda n: st.tuples(permutations_of(n), permutations_of(n), permutations_of(n))))
def test_kendall_tau_triangle_inequality(triple):
    a, b, c = triple
    assert kendall_tau(a, c) <= kendall_tau(a, b) + kendall_tau(b, c)


def test_remove_candidates_keeps_relative_order():
    pi = Permutation((3, 1, 4, 2))
    pr = remove_candidates(pi, {1, 4})
    assert pr.order == (3, 2)
    assert pr.removed == frozenset({1, 4})
    assert pr.top == 3
    with pytest.raises(RankingError):
        remove_candidates(pi, {1, 2, 3, 4})
    with pytest.raises(RankingError):
        remove_candidates(pi, {9})


def test_partial_ranking_must_partition():
    with pytest.raises(RankingError):
        PartialRanking((1, 2), frozenset({2}))
    with pytest.raises(RankingError):
        PartialRanking((), frozenset({1}))


def test_top_value_reads_the_pool():
    pool = CandidatePool((1.0, 0.5, 0.0))
    pr = remove_candidates(Permutation((2, 3, 1)), {2})
    assert top_value(pr, pool) == 0.0
