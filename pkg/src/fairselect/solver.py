"""End-to-end solve: bisection on the dual level L, then the restricted primal.

For a fixed oracle with guarantee (rho, mu):

1. bisect on L, asking the ellipsoid whether C(L) can be marked non-empty;
   L* is the smallest marked level, and its witness certifies OPT <= L*/rho;
2. collect F', the sets whose dual rows were cut during the run at the largest
   empty level;
3. solve the primal restricted to the columns F' (lower bounds scaled by mu,
   upper and pairwise bounds exact). Its optimum is at least L* - eps up to
   ellipsoid precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ellipsoid import EllipsoidConfig, Empty, MarkedNonEmpty, default_radius, ellipsoid_feasible
from .errors import (
    InfeasibleFairness,
    NumericalBreakdown,
    OracleNotApplicable,
    RestrictedLPInfeasible,
    ValidationError,
)
from .lp import LPStatus, build_restricted_primal, solve_lp
from .model import (
    FairnessSpec,
    Instance,
    Pairwise,
    Selection,
    SolutionDistribution,
    check_fairness,
    expected_utilities,
    validate_instance,
)
from .oracle import DEFAULT_CAP, DEFAULT_EXACT_CAP, FairMaxOracle, OracleGuarantee, make_oracle
from .variants import Variant, effective_coeffs  # noqa: F401  (re-exported)

log = logging.getLogger(__name__)

_RELAX_DELTA = 1e-6
_MAX_BRACKET_GROWTH = 8
_INFEASIBILITY_PROBES = 6


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float = 1e-4
    radius: float | None = None
    max_iter: int | None = None
    floor_ratio: float = 1e-7
    bracket: tuple[float, float] | None = None
    collect_all_runs: bool = False
    L_min: float = -1.0
    enum_cap: int = DEFAULT_CAP
    exact_cap: int = DEFAULT_EXACT_CAP
    lp_tol: float = 1e-8

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.L_min < 0:
            raise ValueError("L_min must be negative")


@dataclass(frozen=True)
class SearchResult:
    L_star: float
    F_prime: tuple[Selection, ...]
    witness: np.ndarray
    L_empty: float
    radius: float
    runs: int
    bisections: int
    iterations: int


@dataclass(frozen=True)
class SolveReport:
    distribution: SolutionDistribution
    L_star: float
    F_prime: tuple[Selection, ...]
    witness: np.ndarray
    guarantee: OracleGuarantee
    expected_global: float
    expected_groups: np.ndarray
    epsilon: float
    variant: str
    oracle: str
    relaxed: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.expected_global

    @property
    def upper_bound(self) -> float:
        """L*/rho, an upper bound on the optimum of the unrelaxed program."""
        return self.L_star / self.guarantee.rho if self.guarantee.rho > 0 else float("inf")


def _ellipsoid_config(config: SolveConfig, radius: float) -> EllipsoidConfig:
    return EllipsoidConfig(radius=radius, max_iter=config.max_iter, floor_ratio=config.floor_ratio)


def binary_search_L(variant: Variant, oracle: FairMaxOracle, instance: Instance,
                    config: SolveConfig) -> SearchResult:
    """Smallest marked level L* and the violated sets of the largest empty level."""
    if variant.signed and not oracle.guarantee.signed_coeffs:
        raise OracleNotApplicable(
            f"the {oracle.name} oracle's guarantee does not cover the signed coefficients of {variant.kind}"
        )
    rho = oracle.guarantee.rho
    if config.bracket is not None:
        L_lo, L_hi = map(float, config.bracket)
    else:
        first = oracle(np.zeros(instance.m))
        L_lo, L_hi = 0.0, first.global_value / max(rho, 1e-9)
    radius = config.radius or default_radius(variant, L_hi)
    econf = _ellipsoid_config(config, radius)

    runs = 0
    iterations = 0
    all_sets: dict[Selection, None] = {}

    def run(L):
        nonlocal runs, iterations
        out = ellipsoid_feasible(L, variant, oracle, instance, econf)
        runs += 1
        iterations += out.iterations
        for s in out.violated_sets:
            all_sets.setdefault(s)
        log.debug("L=%.10g -> %s after %d iterations", L, "non-empty" if out.nonempty else "empty",
                  out.iterations)
        return out

    lo_out = run(L_lo)
    if lo_out.nonempty:
        min_out = run(config.L_min)
        if min_out.nonempty:
            raise InfeasibleFairness(
                f"C(L) is marked non-empty down to L={config.L_min}: the fairness constraints "
                "cannot be met by any distribution"
            )
        L_lo, lo_out = config.L_min, min_out

    hi_out = run(L_hi)
    growth = 0
    while not hi_out.nonempty:
        if growth >= _MAX_BRACKET_GROWTH:
            if certify_infeasible(variant, oracle, instance, config, radius):
                raise InfeasibleFairness(
                    f"a dual point at L={config.L_min} exists: the fairness constraints "
                    "cannot be met by any distribution"
                )
            raise NumericalBreakdown(f"no level up to L={L_hi} could be marked non-empty")
        L_lo, lo_out = L_hi, hi_out
        L_hi = L_hi + max(1.0, abs(L_hi))
        hi_out = run(L_hi)
        growth += 1

    bisections = 0
    while L_hi - L_lo > config.epsilon:
        mid = 0.5 * (L_lo + L_hi)
        out = run(mid)
        bisections += 1
        if out.nonempty:
            L_hi, hi_out = mid, out
        else:
            L_lo, lo_out = mid, out

    assert isinstance(hi_out, MarkedNonEmpty) and isinstance(lo_out, Empty)
    F_prime = tuple(all_sets) if config.collect_all_runs else lo_out.violated_sets
    return SearchResult(L_hi, F_prime, hi_out.witness, L_lo, radius, runs, bisections, iterations)


def certify_infeasible(variant: Variant, oracle: FairMaxOracle, instance: Instance, config: SolveConfig,
                       radius: float) -> bool:
    """Look for a dual point below zero in balls ten, a hundred, ... times ``radius``.

    Primal values are nonnegative, so any marked point of C(L_min) proves the
    fairness bounds unsatisfiable. Such a point can sit far outside the default
    search ball when the bounds are large relative to the utilities.
    """
    for j in range(1, _INFEASIBILITY_PROBES + 1):
        out = ellipsoid_feasible(config.L_min, variant, oracle, instance,
                                 _ellipsoid_config(config, radius * 10.0**j))
        if out.nonempty:
            log.debug("infeasibility certified at radius %.3g", radius * 10.0**j)
            return True
    return False


def _distribution(sets, x) -> SolutionDistribution:
    pairs = []
    for s, p in zip(sets, x):
        p = min(max(float(p), 0.0), 1.0)
        if p > 1e-12:
            pairs.append((s, p))
    return SolutionDistribution(tuple(pairs))


def solve(instance: Instance, fairness: FairnessSpec, oracle: str | FairMaxOracle = "exact",
          config: SolveConfig | None = None) -> SolveReport:
    """Distribution over feasible selections with the oracle's (rho, mu) guarantee."""
    config = config or SolveConfig()
    violations = validate_instance(instance) + check_fairness(fairness, instance.m)
    if violations:
        raise ValidationError(violations)
    if isinstance(oracle, str):
        oracle = make_oracle(oracle, instance, cap=config.enum_cap, exact_cap=config.exact_cap)
    guarantee = oracle.guarantee
    mu = 1.0 if isinstance(fairness, Pairwise) else guarantee.mu
    variant = Variant.from_fairness(fairness, instance.m, mu=mu)

    search = binary_search_L(variant, oracle, instance, config)
    sets = list(search.F_prime)
    if not sets:
        # an empty run with no set cuts (e.g. max_iter=0): fall back to the unweighted oracle answer
        sets = [oracle(np.zeros(instance.m)).selection]

    relaxed = False
    sol = solve_lp(build_restricted_primal(fairness, sets, instance, mu), tol=config.lp_tol)
    if sol.status == LPStatus.INFEASIBLE:
        relaxed = True
        sol = solve_lp(build_restricted_primal(fairness, sets, instance, mu, relax=_RELAX_DELTA),
                       tol=config.lp_tol)
    if sol.status == LPStatus.INFEASIBLE:
        if certify_infeasible(variant, oracle, instance, config, search.radius):
            raise InfeasibleFairness(
                f"a dual point at L={config.L_min} exists: the fairness constraints "
                "cannot be met by any distribution"
            )
        raise RestrictedLPInfeasible(
            f"restricted primal over {len(sets)} collected sets is infeasible even after relaxation"
        )
    if sol.status != LPStatus.OPTIMAL:
        raise NumericalBreakdown(f"restricted primal solve ended with status {sol.status.value}")

    dist = _distribution(sets, sol.x)
    value, groups = expected_utilities(instance, dist)
    return SolveReport(
        distribution=dist,
        L_star=search.L_star,
        F_prime=tuple(sets),
        witness=search.witness,
        guarantee=guarantee,
        expected_global=value,
        expected_groups=groups,
        epsilon=config.epsilon,
        variant=variant.kind,
        oracle=oracle.name,
        relaxed=relaxed,
        stats={
            "L_empty": search.L_empty,
            "radius": search.radius,
            "runs": search.runs,
            "bisections": search.bisections,
            "iterations": search.iterations,
            "lp_objective": sol.objective,
        },
    )
