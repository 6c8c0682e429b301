"""Fairness-constrained distributions over feasible selections.

Pick a FairMax oracle, call :func:`solve`, get back a sparse distribution
whose expected utilities meet the fairness bounds up to the oracle's
(rho, mu) guarantee.
"""

from ._kernels import backend
from .errors import (
    FairSelectError,
    FamilyTooLarge,
    InfeasibleFairness,
    InvalidSelection,
    NumericalBreakdown,
    OracleNotApplicable,
    RestrictedLPInfeasible,
    ValidationError,
)
from .model import (
    AllSubsets,
    Box,
    Cardinality,
    GroupCount,
    GroupStructure,
    Instance,
    LowerBounds,
    MNLGroupShare,
    MNLRevenue,
    Modular,
    Pairwise,
    Permutations,
    SequentialMix,
    SolutionDistribution,
    WeightedCoverage,
    enumerate_feasible,
    eval_global,
    eval_group,
    expected_utilities,
    validate_instance,
)
from .oracle import (
    composite_value,
    fairmax_exact,
    fairmax_greedy,
    fairmax_mnl,
    fairmax_sequential,
    make_oracle,
)
from .solver import SolveConfig, SolveReport, binary_search_L, solve
from .verify import brute_force_optimum, check_guarantee, oracle_cross_check, sample_distribution

__version__ = "0.1.0"

__all__ = [
    "AllSubsets",
    "Box",
    "Cardinality",
    "FairSelectError",
    "FamilyTooLarge",
    "GroupCount",
    "GroupStructure",
    "InfeasibleFairness",
    "Instance",
    "InvalidSelection",
    "LowerBounds",
    "MNLGroupShare",
    "MNLRevenue",
    "Modular",
    "NumericalBreakdown",
    "OracleNotApplicable",
    "Pairwise",
    "Permutations",
    "RestrictedLPInfeasible",
    "SequentialMix",
    "SolutionDistribution",
    "SolveConfig",
    "SolveReport",
    "ValidationError",
    "WeightedCoverage",
    "backend",
    "binary_search_L",
    "brute_force_optimum",
    "check_guarantee",
    "composite_value",
    "enumerate_feasible",
    "eval_global",
    "eval_group",
    "expected_utilities",
    "fairmax_exact",
    "fairmax_greedy",
    "fairmax_mnl",
    "fairmax_sequential",
    "make_oracle",
    "oracle_cross_check",
    "sample_distribution",
    "solve",
    "validate_instance",
]
