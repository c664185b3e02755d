"""Exact and simulated analysis of hiring competition under shared rankings.

The package models firms that fill one position each from a common pool of
candidates, choosing between a shared algorithmic ranking and independent
human evaluations. It provides exact enumeration engines for small pools,
coupled Monte Carlo estimators for larger ones, and a game solver that
classifies equilibria, certifies welfare losses, and analyzes many-firm
hiring sequences.
"""

from .core import (
    CandidateDistribution,
    CandidatePool,
    PartialRanking,
    Permutation,
    PoolError,
    PoolOrDistribution,
    RankingError,
    kendall_tau,
    remove_candidates,
    top_value,
    uniform_order_statistic_means,
)
from .estimators import (
    ConditionReport,
    EstimateWithError,
    check_monotonicity,
    check_pref_first_position,
    check_pref_weaker_competition,
    mc_utility_table,
    mc_utility_trials,
    sample_rankings,
)
from .exact import (
    MallowsSubsetPicker,
    SelectionPmf,
    SequentialState,
    UtilityTable,
    exact_selection_pmf,
    exact_sequential_utilities,
    exact_utility_table,
    exact_welfare,
    identity_check_uah_uaa,
    permutation_probabilities,
)
from .models import (
    MallowsModel,
    NoiseSpec,
    RankingModelSpec,
    TieError,
    UnsupportedModelError,
    UnsupportedNoiseError,
    conditional_order_probability,
    mallows_first_choice_pmf,
    mallows_perm_probs,
    mallows_pmf,
    mallows_sample,
    pl_pmf,
    rum_sample,
    well_ordered_check,
)
from .solver import (
    BracketError,
    DominanceReport,
    EquilibriumOutcome,
    KFirmReport,
    PayoffMatrix,
    ScanReport,
    StrategySequence,
    SweepCell,
    ThetaStarResult,
    binary_counter_scan,
    check_dominance,
    classify_equilibrium,
    find_theta_star,
    kfirm_braess_check,
    sequential_optimal_sequence,
    sweep_plane,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CandidateDistribution",
    "CandidatePool",
    "ConditionReport",
    "DominanceReport",
    "EquilibriumOutcome",
    "EstimateWithError",
    "KFirmReport",
    "MallowsModel",
    "MallowsSubsetPicker",
    "NoiseSpec",
    "PartialRanking",
    "PayoffMatrix",
    "Permutation",
    "PoolError",
    "PoolOrDistribution",
    "RankingError",
    "RankingModelSpec",
    "ScanReport",
    "SelectionPmf",
    "SequentialState",
    "StrategySequence",
    "SweepCell",
    "ThetaStarResult",
    "TieError",
    "UnsupportedModelError",
    "UnsupportedNoiseError",
    "UtilityTable",
    "binary_counter_scan",
    "check_dominance",
    "check_monotonicity",
    "check_pref_first_position",
    "check_pref_weaker_competition",
    "classify_equilibrium",
    "conditional_order_probability",
    "exact_selection_pmf",
    "exact_sequential_utilities",
    "exact_utility_table",
    "exact_welfare",
    "find_theta_star",
    "identity_check_uah_uaa",
    "kendall_tau",
    "kfirm_braess_check",
    "mallows_first_choice_pmf",
    "mallows_perm_probs",
    "mallows_pmf",
    "mallows_sample",
    "mc_utility_table",
    "mc_utility_trials",
    "permutation_probabilities",
    "pl_pmf",
    "remove_candidates",
    "rum_sample",
    "sample_rankings",
    "sequential_optimal_sequence",
    "sweep_plane",
    "top_value",
    "uniform_order_statistic_means",
    "well_ordered_check",
]
