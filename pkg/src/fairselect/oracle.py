"""FairMax oracles: maximize f(S) + sum_t c_t g_t(S) over the feasible family.

Each oracle is bound to one instance at construction (that is where the
structural preconditions are checked and any lookup tables are built) and is
then called with a coefficient vector. Oracles hold no mutable state after
construction, so one oracle may serve concurrent callers.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import OracleNotApplicable
from .model import (
    AllSubsets,
    Cardinality,
    GroupCount,
    Instance,
    MNLGroupShare,
    MNLRevenue,
    Modular,
    Selection,
    SequentialMix,
    WeightedCoverage,
    enumerate_feasible,
    group_values,
)

DEFAULT_CAP = 2**20
DEFAULT_EXACT_CAP = math.factorial(8)
GREEDY_RATIO = 1.0 - 1.0 / math.e


@dataclass(frozen=True)
class OracleGuarantee:
    """f(A) + c.g(A) >= rho f(S) + mu c.g(S) for every feasible S.

    ``signed_coeffs`` says whether the bound still holds when some c_t < 0.
    """

    rho: float
    mu: float
    signed_coeffs: bool
    covers: str = ""

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0 and 0.0 <= self.mu <= 1.0):
            raise ValueError(f"guarantee factors must lie in [0, 1], got ({self.rho}, {self.mu})")


@dataclass(frozen=True)
class OracleResult:
    selection: Selection
    value: float
    global_value: float
    group_values: np.ndarray


def composite_value(instance: Instance, selection: Selection, coeffs) -> float:
    """f(S) + sum_t coeffs[t] * g_t(S)."""
    c = np.asarray(coeffs, dtype=float)
    f = instance.global_utility.evaluate(selection, instance.groups)
    return float(f + group_values(instance, selection) @ c)


def _result(instance, selection, coeffs) -> OracleResult:
    f = instance.global_utility.evaluate(selection, instance.groups)
    g = group_values(instance, selection)
    return OracleResult(selection, float(f + g @ coeffs), float(f), g)


class FairMaxOracle:
    name = "abstract"
    guarantee: OracleGuarantee

    def __init__(self, instance: Instance):
        self.instance = instance

    def _coeffs(self, coeffs) -> np.ndarray:
        c = np.asarray(coeffs, dtype=float).reshape(-1)
        if c.shape[0] != self.instance.m:
            raise ValueError(f"expected {self.instance.m} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if not self.guarantee.signed_coeffs and np.any(c < 0):
            raise OracleNotApplicable(
                f"{self.name} oracle needs nonnegative coefficients, got {c.tolist()}"
            )
        return c

    def __call__(self, coeffs) -> OracleResult:
        raise NotImplementedError


class ExactOracle(FairMaxOracle):
    """Enumerates the whole family once, then answers each query by a table scan."""

    name = "exact"
    guarantee = OracleGuarantee(1.0, 1.0, True, "any catalog utilities, any coefficient signs")

    def __init__(self, instance: Instance, cap: int = DEFAULT_CAP):
        super().__init__(instance)
        self.selections = enumerate_feasible(instance, cap)
        groups = instance.groups
        self.fvals = np.array([instance.global_utility.evaluate(s, groups) for s in self.selections])
        self.gvals = np.array(
            [[g.evaluate(s, groups) for g in instance.group_utils] for s in self.selections]
        ).reshape(len(self.selections), instance.m)

    def __call__(self, coeffs) -> OracleResult:
        c = self._coeffs(coeffs)
        idx, value = _kernels.composite_argmax(self.fvals, self.gvals, c)
        idx = int(idx)
        return OracleResult(self.selections[idx], float(value), float(self.fvals[idx]), self.gvals[idx].copy())


class _LinearCombination:
    """Marginal gains of f + sum_t c_t g_t for modular and coverage terms."""

    def __init__(self, instance: Instance, coeffs: np.ndarray):
        n = instance.n
        self.modular = np.zeros(n)
        self.coverage = []
        terms = [(1.0, instance.global_utility)] + list(zip(coeffs, instance.group_utils))
        for coef, spec in terms:
            if coef == 0.0:
                continue
            if isinstance(spec, Modular):
                self.modular += coef * np.asarray(spec.weights, dtype=float)
            elif isinstance(spec, GroupCount):
                for i in instance.groups.members[spec.group]:
                    self.modular[i] += coef
            elif isinstance(spec, WeightedCoverage):
                self.coverage.append((coef, spec.cover_matrix, spec.weight_array))
            else:  # pragma: no cover - guarded by GreedyOracle.__init__
                raise OracleNotApplicable(f"no marginal-gain rule for {type(spec).__name__}")
        self.covered = [np.zeros(w.shape[0], dtype=np.bool_) for _, _, w in self.coverage]

    def gains(self) -> np.ndarray:
        out = self.modular.copy()
        for (coef, cover, weights), covered in zip(self.coverage, self.covered):
            out += coef * _kernels.coverage_gains(cover, weights, covered)
        return out

    def gain(self, item: int) -> float:
        g = self.modular[item]
        for (coef, cover, weights), covered in zip(self.coverage, self.covered):
            g += coef * float(weights[cover[item] & ~covered].sum())
        return g

    def add(self, item: int) -> None:
        for (_, cover, _), covered in zip(self.coverage, self.covered):
            covered |= cover[item]


def _modular_weights(instance: Instance, spec) -> np.ndarray:
    if isinstance(spec, Modular):
        return np.asarray(spec.weights, dtype=float)
    out = np.zeros(instance.n)
    out[sorted(instance.groups.members[spec.group])] = 1.0
    return out


class GreedyOracle(FairMaxOracle):
    """Greedy under a cardinality bound.

    With nonnegative coefficients the composite is monotone submodular and lazy
    greedy applies. Negative coefficients are accepted only when every group
    utility is modular: the negative part is then a modular cost and distorted
    greedy (gains damped by (1 - 1/k)^(k - i - 1) in round i, minus the cost)
    returns A with f(A) + c.g(A) >= (1 - 1/e)(f + c+.g)(S) - c-.g(S) for every S,
    which implies the (1 - 1/e, 1 - 1/e) bound.
    """

    name = "greedy"

    def __init__(self, instance: Instance):
        super().__init__(instance)
        if not isinstance(instance.family, Cardinality):
            raise OracleNotApplicable("greedy oracle needs a cardinality family")
        for path, spec in [("global", instance.global_utility)] + [
            (f"group_utils[{t}]", s) for t, s in enumerate(instance.group_utils)
        ]:
            if not isinstance(spec, (Modular, GroupCount, WeightedCoverage)):
                raise OracleNotApplicable(
                    f"greedy oracle needs monotone submodular catalog utilities; {path} is {type(spec).__name__}"
                )
        signed = all(isinstance(g, (Modular, GroupCount)) for g in instance.group_utils)
        self.guarantee = OracleGuarantee(
            GREEDY_RATIO,
            GREEDY_RATIO,
            signed,
            "cardinality family, monotone submodular f; signed coefficients need modular g_t"
            if signed else "cardinality family, monotone submodular f and g_t, nonnegative coefficients",
        )

    def __call__(self, coeffs) -> OracleResult:
        c = self._coeffs(coeffs)
        if np.any(c < 0):
            return self._distorted(c)
        combo = _LinearCombination(self.instance, c)
        k = self.instance.family.k
        # heap of (-upper bound on gain, item, round the bound was computed in)
        heap = [(-g, i, 0) for i, g in enumerate(combo.gains())]
        heapq.heapify(heap)
        chosen: list[int] = []
        rnd = 0
        while heap and len(chosen) < k:
            neg, item, stamp = heapq.heappop(heap)
            if stamp == rnd:
                if -neg <= 0.0:
                    break
                chosen.append(item)
                combo.add(item)
                rnd += 1
            else:
                heapq.heappush(heap, (-combo.gain(item), item, rnd))
        return _result(self.instance, tuple(sorted(chosen)), c)

    def _distorted(self, c: np.ndarray) -> OracleResult:
        inst = self.instance
        monotone = _LinearCombination(inst, np.maximum(c, 0.0))
        cost = np.zeros(inst.n)
        for coef, spec in zip(c, inst.group_utils):
            if coef < 0:
                cost -= coef * _modular_weights(inst, spec)
        k = inst.family.k
        taken = np.zeros(inst.n, dtype=bool)
        for i in range(k):
            damping = (1.0 - 1.0 / k) ** (k - i - 1)
            scores = damping * monotone.gains() - cost
            scores[taken] = -np.inf
            best = int(np.argmax(scores))
            if scores[best] > 0.0:
                taken[best] = True
                monotone.add(best)
        return _result(inst, tuple(int(i) for i in np.flatnonzero(taken)), c)


class MNLOracle(FairMaxOracle):
    """Revenue-ordered assortments with group-adjusted revenues."""

    name = "mnl"
    guarantee = OracleGuarantee(
        1.0, 1.0, False, "all-subsets family, MNL revenue and group shares, nonnegative coefficients"
    )

    def __init__(self, instance: Instance):
        super().__init__(instance)
        f = instance.global_utility
        if not isinstance(instance.family, AllSubsets):
            raise OracleNotApplicable("MNL oracle needs the all-subsets family")
        if not isinstance(f, MNLRevenue):
            raise OracleNotApplicable("MNL oracle needs an MNL revenue global utility")
        for t, g in enumerate(instance.group_utils):
            if not isinstance(g, MNLGroupShare) or g.group != t:
                raise OracleNotApplicable(f"group_utils[{t}] must be the MNL share of group {t}")
            if tuple(g.nu) != tuple(f.nu) or g.nu0 != f.nu0:
                raise OracleNotApplicable(f"group_utils[{t}] uses different MNL preference weights")
        self.revenues = np.asarray(f.revenues, dtype=float)
        self.nu = np.asarray(f.nu, dtype=float)
        self.nu0 = float(f.nu0)
        self.indicator = instance.groups.indicator(instance.n)

    def __call__(self, coeffs) -> OracleResult:
        c = self._coeffs(coeffs)
        adjusted = self.revenues + self.indicator.T @ c
        order = np.lexsort((np.arange(self.instance.n), -adjusted))
        length, _ = _kernels.mnl_best_prefix(adjusted[order], self.nu[order], self.nu0)
        selection = tuple(sorted(int(i) for i in order[: int(length)]))
        return _result(self.instance, selection, c)


class SequentialOracle(FairMaxOracle):
    """Permutation FairMax: exhaustive when n! <= exact_cap, else laminar-matroid greedy.

    The greedy works on (item, level) pairs. A pair set is independent when every
    item appears at most once and at most l pairs have level <= l. Selected pairs
    are read off in level order (then item order) and the unused items are
    appended by index.
    """

    name = "sequential"

    def __init__(self, instance: Instance, exact_cap: int = DEFAULT_EXACT_CAP):
        super().__init__(instance)
        if not instance.is_permutation:
            raise OracleNotApplicable("sequential oracle needs a permutation family")
        for path, spec in [("global", instance.global_utility)] + [
            (f"group_utils[{t}]", s) for t, s in enumerate(instance.group_utils)
        ]:
            if not isinstance(spec, SequentialMix) or not (spec.monotone and spec.submodular):
                raise OracleNotApplicable(f"{path} must be a monotone submodular sequential mix")
        self.exact = math.factorial(instance.n) <= exact_cap
        self._table = ExactOracle(instance, cap=exact_cap) if self.exact else None
        if self.exact:
            self.guarantee = OracleGuarantee(1.0, 1.0, False, "exhaustive over permutations")
        else:
            self.guarantee = OracleGuarantee(
                0.5, 0.5, False, "matroid greedy; monotone submodular levels, nonnegative coefficients"
            )

    def __call__(self, coeffs) -> OracleResult:
        c = self._coeffs(coeffs)
        if self._table is not None:
            return self._table(c)
        return _result(self.instance, self.greedy_permutation(c), c)

    def _level_value(self, level: int, items, c) -> float:
        inst = self.instance
        v = inst.global_utility.level_value(level, items, inst.groups)
        for ct, g in zip(c, inst.group_utils):
            if ct:
                v += ct * g.level_value(level, items, inst.groups)
        return v

    def greedy_permutation(self, coeffs) -> Selection:
        """Matroid greedy over (item, level) pairs; always runs, even when n! is small."""
        c = np.asarray(coeffs, dtype=float)
        n = self.instance.n
        levels = range(1, n + 1)
        level_of: dict[int, int] = {}
        while len(level_of) < n:
            # items placed at level <= l, for each l
            prefix_sets = {l: [i for i, li in level_of.items() if li <= l] for l in levels}
            base = {l: self._level_value(l, prefix_sets[l], c) for l in levels}
            counts = {l: len(prefix_sets[l]) for l in levels}
            best = None
            for item in range(n):
                if item in level_of:
                    continue
                for level in levels:
                    if any(counts[l] + 1 > l for l in range(level, n + 1)):
                        continue
                    gain = sum(
                        self._level_value(l, prefix_sets[l] + [item], c) - base[l]
                        for l in range(level, n + 1)
                    )
                    if best is None or gain > best[0] + 1e-12:
                        best = (gain, item, level)
            if best is None or best[0] <= 0.0:
                break
            level_of[best[1]] = best[2]
        ordered = sorted(level_of, key=lambda i: (level_of[i], i))
        rest = [i for i in range(n) if i not in level_of]
        return tuple(ordered + rest)


ORACLES = ("exact", "greedy", "mnl", "sequential")


def make_oracle(name: str, instance: Instance, *, cap: int = DEFAULT_CAP,
                exact_cap: int = DEFAULT_EXACT_CAP) -> FairMaxOracle:
    if name == "exact":
        return ExactOracle(instance, cap=cap)
    if name == "greedy":
        return GreedyOracle(instance)
    if name == "mnl":
        return MNLOracle(instance)
    if name == "sequential":
        return SequentialOracle(instance, exact_cap=exact_cap)
    raise ValueError(f"unknown oracle {name!r}; choose from {', '.join(ORACLES)}")


def fairmax_exact(instance: Instance, coeffs, cap: int = DEFAULT_CAP) -> OracleResult:
    return ExactOracle(instance, cap=cap)(coeffs)


def fairmax_greedy(instance: Instance, coeffs) -> OracleResult:
    return GreedyOracle(instance)(coeffs)


def fairmax_mnl(instance: Instance, coeffs) -> OracleResult:
    return MNLOracle(instance)(coeffs)


def fairmax_sequential(instance: Instance, coeffs, exact_cap: int = DEFAULT_EXACT_CAP) -> OracleResult:
    return SequentialOracle(instance, exact_cap=exact_cap)(coeffs)
