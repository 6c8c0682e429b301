"""Problem instances, the utility catalog, and feasible-family enumeration.

Selections are tuples of item indices. For set families the tuple is sorted
(the canonical form); for the permutation family it is the ordering itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import FamilyTooLarge, InvalidSelection

Selection = tuple[int, ...]


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


# --------------------------------------------------------------------------
# groups
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupStructure:
    """Possibly overlapping groups V_0..V_{m-1} of item indices."""

    members: tuple[frozenset[int], ...]

    @classmethod
    def from_lists(cls, groups: Sequence[Sequence[int]]) -> GroupStructure:
        return cls(tuple(frozenset(int(i) for i in g) for g in groups))

    @property
    def m(self) -> int:
        return len(self.members)

    def indicator(self, n: int) -> np.ndarray:
        """(m, n) 0/1 membership matrix."""
        ind = np.zeros((self.m, n))
        for t, group in enumerate(self.members):
            for i in group:
                ind[t, i] = 1.0
        return ind

    def check(self, n: int) -> list[Violation]:
        out = []
        if self.m < 1:
            out.append(Violation("groups", "at least one group is required"))
        for t, group in enumerate(self.members):
            bad = sorted(i for i in group if not 0 <= i < n)
            if bad:
                out.append(Violation(f"groups[{t}]", f"item indices {bad} outside [0, {n})"))
        return out


# --------------------------------------------------------------------------
# utility catalog
# --------------------------------------------------------------------------

def _nonneg_finite(values, path) -> list[Violation]:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        return [Violation(path, "entries must be finite")]
    if np.any(arr < 0):
        return [Violation(path, "entries must be nonnegative")]
    return []


class UtilitySpec:
    """Base class of the closed utility catalog.

    Subclasses evaluate a set (given as an iterable of item indices) against
    the instance's group structure and advertise their structural class, which
    is what the oracles use to decide whether their guarantees apply.
    """

    monotone = False
    submodular = False
    modular = False
    sequential = False

    def evaluate(self, selection, groups: GroupStructure) -> float:
        raise NotImplementedError

    def check(self, n: int, groups: GroupStructure, path: str) -> list[Violation]:
        return []


@dataclass(frozen=True)
class Modular(UtilitySpec):
    weights: tuple[float, ...]

    monotone = True
    submodular = True
    modular = True

    def evaluate(self, selection, groups):
        w = self.weights
        return float(sum(w[i] for i in selection))

    def check(self, n, groups, path):
        out = _nonneg_finite(self.weights, f"{path}.weights")
        if len(self.weights) != n:
            out.append(Violation(f"{path}.weights", f"expected {n} weights, got {len(self.weights)}"))
        return out


@dataclass(frozen=True)
class WeightedCoverage(UtilitySpec):
    """Total weight of the union of elements covered by the selected items."""

    element_weights: tuple[float, ...]
    covers: tuple[frozenset[int], ...]

    monotone = True
    submodular = True

    @cached_property
    def cover_matrix(self) -> np.ndarray:
        mat = np.zeros((len(self.covers), len(self.element_weights)), dtype=np.bool_)
        for i, elems in enumerate(self.covers):
            for e in elems:
                mat[i, e] = True
        return mat

    @cached_property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.element_weights, dtype=float)

    def evaluate(self, selection, groups):
        items = list(selection)
        if not items:
            return 0.0
        mask = self.cover_matrix[items].any(axis=0)
        return float(self.weight_array[mask].sum())

    def check(self, n, groups, path):
        out = _nonneg_finite(self.element_weights, f"{path}.element_weights")
        if len(self.covers) != n:
            out.append(Violation(f"{path}.covers", f"expected {n} cover sets, got {len(self.covers)}"))
        n_elem = len(self.element_weights)
        for i, elems in enumerate(self.covers):
            bad = sorted(e for e in elems if not 0 <= e < n_elem)
            if bad:
                out.append(Violation(f"{path}.covers[{i}]", f"element indices {bad} outside [0, {n_elem})"))
        return out


@dataclass(frozen=True)
class GroupCount(UtilitySpec):
    """|S ∩ V_t|."""

    group: int

    monotone = True
    submodular = True
    modular = True

    def evaluate(self, selection, groups):
        members = groups.members[self.group]
        return float(sum(1 for i in selection if i in members))

    def check(self, n, groups, path):
        if not 0 <= self.group < groups.m:
            return [Violation(f"{path}.group", f"group index {self.group} outside [0, {groups.m})")]
        return []


def _check_mnl(nu, nu0, n, path) -> list[Violation]:
    out = []
    if len(nu) != n:
        out.append(Violation(f"{path}.nu", f"expected {n} preference weights, got {len(nu)}"))
    arr = np.asarray(nu, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        out.append(Violation(f"{path}.nu", "preference weights must be positive and finite"))
    if not (math.isfinite(nu0) and nu0 > 0):
        out.append(Violation(f"{path}.nu0", "no-purchase weight must be positive"))
    return out


@dataclass(frozen=True)
class MNLRevenue(UtilitySpec):
    """Expected revenue of offering an assortment under the MNL choice model."""

    revenues: tuple[float, ...]
    nu: tuple[float, ...]
    nu0: float

    def evaluate(self, selection, groups):
        num = 0.0
        den = self.nu0
        for i in selection:
            num += self.revenues[i] * self.nu[i]
            den += self.nu[i]
        return num / den

    def purchase_probabilities(self, selection) -> tuple[dict[int, float], float]:
        """Per-item purchase probabilities and the no-purchase probability."""
        den = self.nu0 + sum(self.nu[i] for i in selection)
        return {i: self.nu[i] / den for i in selection}, self.nu0 / den

    def check(self, n, groups, path):
        out = _check_mnl(self.nu, self.nu0, n, path)
        out += _nonneg_finite(self.revenues, f"{path}.revenues")
        if len(self.revenues) != n:
            out.append(Violation(f"{path}.revenues", f"expected {n} revenues, got {len(self.revenues)}"))
        return out


@dataclass(frozen=True)
class MNLGroupShare(UtilitySpec):
    """Market share captured by group t's items under the MNL choice model."""

    group: int
    nu: tuple[float, ...]
    nu0: float

    def evaluate(self, selection, groups):
        members = groups.members[self.group]
        num = 0.0
        den = self.nu0
        for i in selection:
            den += self.nu[i]
            if i in members:
                num += self.nu[i]
        return num / den

    def check(self, n, groups, path):
        out = _check_mnl(self.nu, self.nu0, n, path)
        if not 0 <= self.group < groups.m:
            out.append(Violation(f"{path}.group", f"group index {self.group} outside [0, {groups.m})"))
        return out


@dataclass(frozen=True)
class SequentialMix(UtilitySpec):
    """sum_l lambdas[l-1] * components[l-1](first l items of a permutation).

    Levels beyond ``len(lambdas)`` contribute nothing.
    """

    lambdas: tuple[float, ...]
    components: tuple[UtilitySpec, ...]

    sequential = True

    @property
    def monotone(self):
        return all(c.monotone for c in self.components)

    @property
    def submodular(self):
        return all(c.submodular for c in self.components)

    def evaluate(self, selection, groups):
        total = 0.0
        prefix = []
        for level, item in enumerate(selection):
            prefix.append(item)
            if level >= len(self.lambdas):
                break
            lam = self.lambdas[level]
            if lam:
                total += lam * self.components[level].evaluate(prefix, groups)
        return total

    def level_value(self, level: int, items, groups) -> float:
        """lambda_l * h_l(items) for 1-based ``level``."""
        if level > len(self.lambdas):
            return 0.0
        lam = self.lambdas[level - 1]
        return lam * self.components[level - 1].evaluate(items, groups) if lam else 0.0

    def check(self, n, groups, path):
        out = _nonneg_finite(self.lambdas, f"{path}.lambdas")
        if len(self.lambdas) > n:
            out.append(Violation(f"{path}.lambdas", f"at most {n} levels allowed, got {len(self.lambdas)}"))
        if len(self.components) != len(self.lambdas):
            out.append(Violation(f"{path}.components", "one component per level is required"))
        for l, comp in enumerate(self.components):
            if comp.sequential:
                out.append(Violation(f"{path}.components[{l}]", "components must be set functions"))
            else:
                out += comp.check(n, groups, f"{path}.components[{l}]")
        return out


# --------------------------------------------------------------------------
# feasible families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Cardinality:
    k: int


@dataclass(frozen=True)
class AllSubsets:
    pass


@dataclass(frozen=True)
class Permutations:
    pass


Family = Union[Cardinality, AllSubsets, Permutations]


# --------------------------------------------------------------------------
# fairness specs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBounds:
    alpha: tuple[float, ...]


@dataclass(frozen=True)
class Box:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]


@dataclass(frozen=True)
class Pairwise:
    """gamma[t][t2] bounds E[g_t] - E[g_t2]; the diagonal is ignored."""

    gamma: tuple[tuple[float, ...], ...]


FairnessSpec = Union[LowerBounds, Box, Pairwise]


def check_fairness(fairness: FairnessSpec, m: int) -> list[Violation]:
    out = []
    if isinstance(fairness, LowerBounds):
        out += _nonneg_finite(fairness.alpha, "fairness.alpha")
        if len(fairness.alpha) != m:
            out.append(Violation("fairness.alpha", f"expected {m} entries, got {len(fairness.alpha)}"))
    elif isinstance(fairness, Box):
        out += _nonneg_finite(fairness.alpha, "fairness.alpha")
        out += _nonneg_finite(fairness.beta, "fairness.beta")
        if len(fairness.alpha) != m or len(fairness.beta) != m:
            out.append(Violation("fairness", f"alpha and beta need {m} entries each"))
        else:
            for t, (a, b) in enumerate(zip(fairness.alpha, fairness.beta)):
                if a > b:
                    out.append(Violation(f"fairness.alpha[{t}]", f"lower bound {a} exceeds upper bound {b}"))
    elif isinstance(fairness, Pairwise):
        if len(fairness.gamma) != m or any(len(row) != m for row in fairness.gamma):
            out.append(Violation("fairness.gamma", f"expected an {m}x{m} matrix"))
        else:
            g = np.asarray(fairness.gamma, dtype=float)
            off = g[~np.eye(m, dtype=bool)]
            out += _nonneg_finite(off, "fairness.gamma")
    else:
        out.append(Violation("fairness", f"unknown fairness spec {type(fairness).__name__}"))
    return out


# --------------------------------------------------------------------------
# instances
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    n: int
    groups: GroupStructure
    global_utility: UtilitySpec
    group_utils: tuple[UtilitySpec, ...]
    family: Family

    @property
    def m(self) -> int:
        return self.groups.m

    @property
    def is_permutation(self) -> bool:
        return isinstance(self.family, Permutations)

    def specs(self):
        return (self.global_utility, *self.group_utils)


def validate_instance(instance: Instance) -> list[Violation]:
    """Every invariant breach in ``instance``; an empty list means valid."""
    out: list[Violation] = []
    n = instance.n
    if not isinstance(n, int) or n < 1:
        return [Violation("n", f"item count must be a positive integer, got {n!r}")]
    out += instance.groups.check(n)
    if len(instance.group_utils) != instance.m:
        out.append(Violation("group_utils", f"group_utils length {len(instance.group_utils)} ≠ m={instance.m}"))
    out += instance.global_utility.check(n, instance.groups, "global")
    for t, spec in enumerate(instance.group_utils):
        out += spec.check(n, instance.groups, f"group_utils[{t}]")

    fam = instance.family
    if isinstance(fam, Cardinality):
        if not 1 <= fam.k <= n:
            out.append(Violation("family.k", f"cardinality bound must lie in [1, {n}], got {fam.k}"))
    elif isinstance(fam, Permutations):
        for path, spec in [("global", instance.global_utility)] + [
            (f"group_utils[{t}]", s) for t, s in enumerate(instance.group_utils)
        ]:
            if not spec.sequential:
                out.append(Violation(path, "permutation families need sequential utilities"))
    elif not isinstance(fam, AllSubsets):
        out.append(Violation("family", f"unknown family {type(fam).__name__}"))
    if not isinstance(fam, Permutations):
        for path, spec in [("global", instance.global_utility)] + [
            (f"group_utils[{t}]", s) for t, s in enumerate(instance.group_utils)
        ]:
            if spec.sequential:
                out.append(Violation(path, "sequential utilities need a permutation family"))
    return out


def is_feasible(instance: Instance, selection: Selection) -> bool:
    n = instance.n
    if instance.is_permutation:
        return len(selection) == n and sorted(selection) == list(range(n))
    if any(not 0 <= i < n for i in selection):
        return False
    if len(set(selection)) != len(selection) or list(selection) != sorted(selection):
        return False
    if isinstance(instance.family, Cardinality):
        return len(selection) <= instance.family.k
    return True


def canonical(instance: Instance, selection) -> Selection:
    """Canonical tuple form: sorted for sets, unchanged for permutations."""
    sel = tuple(int(i) for i in selection)
    return sel if instance.is_permutation else tuple(sorted(sel))


def _require_feasible(instance, selection):
    if not is_feasible(instance, selection):
        raise InvalidSelection(f"{selection!r} is not in the feasible family {instance.family}")


def eval_global(instance: Instance, selection: Selection) -> float:
    _require_feasible(instance, selection)
    return instance.global_utility.evaluate(selection, instance.groups)


def eval_group(instance: Instance, t: int, selection: Selection) -> float:
    if not 0 <= t < instance.m:
        raise IndexError(f"group index {t} outside [0, {instance.m})")
    _require_feasible(instance, selection)
    return instance.group_utils[t].evaluate(selection, instance.groups)


def group_values(instance: Instance, selection: Selection) -> np.ndarray:
    """All m group utilities of ``selection`` (no feasibility check)."""
    return np.array([g.evaluate(selection, instance.groups) for g in instance.group_utils])


def family_size(instance: Instance) -> int:
    n = instance.n
    fam = instance.family
    if isinstance(fam, Cardinality):
        return sum(math.comb(n, j) for j in range(min(fam.k, n) + 1))
    if isinstance(fam, AllSubsets):
        return 2**n
    return math.factorial(n)


def enumerate_feasible(instance: Instance, cap: int) -> list[Selection]:
    """Every feasible selection, sets by size then lexicographically."""
    size = family_size(instance)
    if size > cap:
        raise FamilyTooLarge(size, cap)
    n = instance.n
    if instance.is_permutation:
        return list(itertools.permutations(range(n)))
    k = instance.family.k if isinstance(instance.family, Cardinality) else n
    return [c for j in range(k + 1) for c in itertools.combinations(range(n), j)]


# --------------------------------------------------------------------------
# distributions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionDistribution:
    """Sparse distribution over selections; leftover mass means "select nothing"."""

    support: tuple[tuple[Selection, float], ...] = field(default_factory=tuple)

    @classmethod
    def from_pairs(cls, pairs) -> SolutionDistribution:
        return cls(tuple((tuple(int(i) for i in s), float(p)) for s, p in pairs))

    @property
    def total_mass(self) -> float:
        return float(sum(p for _, p in self.support))

    def check(self, instance: Instance, tol: float = 1e-6) -> list[Violation]:
        out = []
        seen = set()
        for j, (sel, p) in enumerate(self.support):
            if p < -tol:
                out.append(Violation(f"support[{j}]", f"negative probability {p}"))
            if not is_feasible(instance, sel):
                out.append(Violation(f"support[{j}]", f"{sel} is not feasible"))
            if sel in seen:
                out.append(Violation(f"support[{j}]", f"duplicate selection {sel}"))
            seen.add(sel)
        if self.total_mass > 1 + tol:
            out.append(Violation("support", f"total probability {self.total_mass} exceeds 1"))
        return out


def expected_utilities(instance: Instance, dist: SolutionDistribution) -> tuple[float, np.ndarray]:
    """(sum_S x_S f(S), [sum_S x_S g_t(S) for t])."""
    total = 0.0
    groups = np.zeros(instance.m)
    for sel, p in dist.support:
        if p == 0.0:
            continue
        total += p * instance.global_utility.evaluate(sel, instance.groups)
        groups += p * group_values(instance, sel)
    return total, groups
