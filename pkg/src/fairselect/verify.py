"""Brute-force baselines and statistical checks for small instances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBreakdown
from .io import ReportFile
from .lp import LPStatus, build_restricted_primal, solve_lp
from .model import (
    Box,
    FairnessSpec,
    Instance,
    LowerBounds,
    Pairwise,
    SolutionDistribution,
    enumerate_feasible,
    expected_utilities,
    group_values,
)
from .oracle import DEFAULT_CAP, FairMaxOracle
from .solver import SolveReport


@dataclass(frozen=True)
class Baseline:
    """Exact optimum of the unrelaxed program over the whole feasible family."""

    feasible: bool
    opt: float | None = None
    distribution: SolutionDistribution | None = None


@dataclass(frozen=True)
class Clause:
    name: str
    slack: float
    passed: bool

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} (slack {self.slack:.3g})"


@dataclass(frozen=True)
class CheckReport:
    opt: float
    achieved: float
    ratio: float
    clauses: tuple[Clause, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    @property
    def slacks(self) -> dict[str, float]:
        return {c.name: c.slack for c in self.clauses}


@dataclass(frozen=True)
class SampleSummary:
    global_mean: float
    group_means: np.ndarray
    global_se: float
    group_se: np.ndarray


def brute_force_optimum(instance: Instance, fairness: FairnessSpec, cap: int = DEFAULT_CAP) -> Baseline:
    """Solve the full LP over every feasible selection with mu = 1."""
    sets = enumerate_feasible(instance, cap)
    sol = solve_lp(build_restricted_primal(fairness, sets, instance, mu=1.0))
    if sol.status == LPStatus.INFEASIBLE:
        return Baseline(False)
    if sol.status != LPStatus.OPTIMAL:
        raise NumericalBreakdown(f"baseline LP ended with status {sol.status.value}")
    pairs = [(s, float(p)) for s, p in zip(sets, np.clip(sol.x, 0.0, 1.0)) if p > 1e-12]
    return Baseline(True, float(sol.objective), SolutionDistribution(tuple(pairs)))


def check_guarantee(report: SolveReport | ReportFile, baseline: Baseline, fairness: FairnessSpec,
                    tol: float = 1e-3, instance: Instance | None = None) -> CheckReport:
    """Test each clause of the (rho, mu) contract for one solve against its baseline.

    The value clause is ``value >= rho * OPT - tol``. When the lower bounds are
    not relaxed, ``value <= OPT + tol`` catches reports claiming more than is
    achievable; ``value <= L*/rho + eps`` is checked in every case.
    Passing ``instance`` also re-derives the expectations from the distribution
    and checks that every support member is feasible.
    """
    rho, mu = report.guarantee.rho, report.guarantee.mu
    value = float(report.value)
    groups = np.asarray(report.expected_groups, dtype=float)
    mass = report.distribution.total_mass
    clauses: list[Clause] = []

    def clause(name, slack):
        clauses.append(Clause(name, float(slack), bool(slack >= -tol)))

    if not baseline.feasible:
        clauses.append(Clause("baseline feasible", float("-inf"), False))
        return CheckReport(float("nan"), value, float("nan"), tuple(clauses))
    opt = float(baseline.opt)
    clause("value >= rho*OPT", value - rho * opt)
    if mu == 1.0 or isinstance(fairness, Pairwise):
        # with mu < 1 the relaxed program may legitimately beat the unrelaxed OPT
        clause("value <= OPT", opt - value)
    clause("value <= upper bound", report.upper_bound + report.epsilon - value)
    clause("probability mass <= 1", 1.0 - mass)
    clause("probabilities >= 0", min((p for _, p in report.distribution.support), default=0.0))

    if isinstance(fairness, (LowerBounds, Box)):
        for t, a in enumerate(fairness.alpha):
            clause(f"E[g_{t}] >= mu*alpha_{t}", groups[t] - mu * a)
    if isinstance(fairness, Box):
        for t, b in enumerate(fairness.beta):
            clause(f"E[g_{t}] <= beta_{t}", b - groups[t])
    if isinstance(fairness, Pairwise):
        m = len(groups)
        for t in range(m):
            for t2 in range(m):
                if t != t2:
                    clause(f"E[g_{t}] - E[g_{t2}] <= gamma_{t},{t2}",
                           fairness.gamma[t][t2] - (groups[t] - groups[t2]))
    if instance is not None:
        bad = report.distribution.check(instance, tol)
        bad = [v for v in bad if "exceeds 1" not in v.message]
        clauses.append(Clause("support feasible and distinct", float(-len(bad)), not bad))
        true_value, true_groups = expected_utilities(instance, report.distribution)
        clause("reported value matches distribution", 0.0 - abs(true_value - value))
        clause("reported group expectations match distribution",
               0.0 - float(np.max(np.abs(true_groups - groups), initial=0.0)))
    ratio = value / opt if opt > 0 else (1.0 if abs(value) <= tol else float("inf"))
    return CheckReport(opt, value, ratio, tuple(clauses))


def sample_distribution(instance: Instance, dist: SolutionDistribution, trials: int,
                        seed: int = 0) -> SampleSummary | None:
    """Empirical means and standard errors of ``trials`` seeded draws.

    Residual mass draws the empty selection, whose utilities are all zero.
    Returns None when ``trials`` is 0.
    """
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0:
        return None
    k = len(dist.support)
    probs = np.array([p for _, p in dist.support] + [0.0])
    probs = np.clip(probs, 0.0, None)
    probs[-1] = max(0.0, 1.0 - probs[:-1].sum())
    probs /= probs.sum()
    fvals = np.zeros(k + 1)
    gvals = np.zeros((k + 1, instance.m))
    for j, (sel, _) in enumerate(dist.support):
        fvals[j] = instance.global_utility.evaluate(sel, instance.groups)
        gvals[j] = group_values(instance, sel)
    rng = np.random.default_rng(seed)
    draws = rng.choice(k + 1, size=trials, p=probs)
    f = fvals[draws]
    g = gvals[draws]
    denom = np.sqrt(trials)
    ddof = 1 if trials > 1 else 0
    return SampleSummary(
        float(f.mean()),
        g.mean(axis=0),
        float(f.std(ddof=ddof) / denom),
        g.std(axis=0, ddof=ddof) / denom,
    )


def oracle_cross_check(instance: Instance, coeffs, oracle: FairMaxOracle, cap: int = DEFAULT_CAP) -> float:
    """Oracle composite value over the enumerated maximum (1.0 when both are 0)."""
    c = np.asarray(coeffs, dtype=float)
    sets = enumerate_feasible(instance, cap)
    best = max(instance.global_utility.evaluate(s, instance.groups) + group_values(instance, s) @ c
               for s in sets)
    got = oracle(c).value
    if abs(best) <= 1e-12:
        return 1.0 if got >= best - 1e-12 else float("-inf")
    return float(got / best)
