"""Seeded random instance generators for tests, the acceptance suite and benchmarks.

Feasible fairness bounds are derived from an anchor distribution: a few random
feasible selections with random weights. Whatever the anchor achieves is
achievable, so every bound set built below it is satisfiable by construction.

Bump ``GENERATOR_VERSION`` whenever a generator's output for a given seed changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    AllSubsets,
    Box,
    Cardinality,
    FairnessSpec,
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
    UtilitySpec,
    WeightedCoverage,
    group_values,
)

GENERATOR_VERSION = 1

KINDS = ("p0", "coverage", "mnl", "box", "pairwise", "infeasible", "sequential")


@dataclass(frozen=True)
class Case:
    instance: Instance
    fairness: FairnessSpec
    kind: str
    seed: int


def _rng(kind: str, seed: int) -> np.random.Generator:
    # one independent stream per (generator, version, seed)
    return np.random.default_rng([GENERATOR_VERSION, KINDS.index(kind), seed])


def _groups(rng, n: int, m: int) -> GroupStructure:
    """m nonempty, possibly overlapping groups; every item lands in at least one."""
    members = [set() for _ in range(m)]
    for i in range(n):
        members[int(rng.integers(m))].add(i)
        for t in range(m):
            if rng.random() < 0.15:
                members[t].add(i)
    for t in range(m):
        if not members[t]:
            members[t].add(int(rng.integers(n)))
    return GroupStructure.from_lists([sorted(g) for g in members])


def _coverage(rng, n: int, universe: int | None = None) -> WeightedCoverage:
    universe = universe or int(rng.integers(4, 11))
    weights = tuple(float(w) for w in np.round(rng.uniform(0.5, 3.0, universe), 3))
    covers = []
    for _ in range(n):
        size = int(rng.integers(1, max(2, universe // 2) + 1))
        covers.append(frozenset(int(e) for e in rng.choice(universe, size=size, replace=False)))
    return WeightedCoverage(weights, tuple(covers))


def _modular(rng, n: int) -> Modular:
    return Modular(tuple(float(w) for w in np.round(rng.uniform(0.0, 5.0, n), 3)))


def _random_selection(rng, instance: Instance):
    n = instance.n
    if instance.is_permutation:
        return tuple(int(i) for i in rng.permutation(n))
    k = instance.family.k if isinstance(instance.family, Cardinality) else n
    size = int(rng.integers(1, k + 1))
    return tuple(sorted(int(i) for i in rng.choice(n, size=size, replace=False)))


def anchor_expectations(rng, instance: Instance) -> np.ndarray:
    """Group expectations of a random distribution over 1 to 3 feasible selections."""
    count = int(rng.integers(1, 4))
    weights = rng.dirichlet(np.ones(count))
    out = np.zeros(instance.m)
    for w in weights:
        out += w * group_values(instance, _random_selection(rng, instance))
    return out


def _lower_bounds(rng, anchor: np.ndarray) -> LowerBounds:
    scale = rng.uniform(0.3, 1.0, anchor.shape[0])
    return LowerBounds(tuple(float(a) for a in np.round(anchor * scale, 4)))


def _set_instance(rng, n, m, k, global_utility: UtilitySpec, group_kind: str) -> Instance:
    groups = _groups(rng, n, m)
    if group_kind == "count":
        gutils = tuple(GroupCount(t) for t in range(m))
    else:
        gutils = tuple(_coverage(rng, n) if rng.random() < 0.5 else GroupCount(t) for t in range(m))
    return Instance(n, groups, global_utility, gutils, Cardinality(k))


def random_p0(seed: int) -> Case:
    """Lower-bound instance with n <= 8, m <= 3, k <= 4 and catalog utilities."""
    rng = _rng("p0", seed)
    n = int(rng.integers(3, 9))
    m = int(rng.integers(1, 4))
    k = int(rng.integers(1, min(4, n) + 1))
    f = _modular(rng, n) if rng.random() < 0.5 else _coverage(rng, n)
    inst = _set_instance(rng, n, m, k, f, "mixed")
    return Case(inst, _lower_bounds(rng, anchor_expectations(rng, inst)), "p0", seed)


def random_coverage(seed: int) -> Case:
    """Monotone submodular instance: coverage f, group counts or coverages, k <= 4."""
    rng = _rng("coverage", seed)
    n = int(rng.integers(4, 9))
    m = int(rng.integers(1, 4))
    k = int(rng.integers(2, min(4, n) + 1))
    inst = _set_instance(rng, n, m, k, _coverage(rng, n), "mixed")
    return Case(inst, _lower_bounds(rng, anchor_expectations(rng, inst)), "coverage", seed)


def mnl_instance(rng, n: int, m: int) -> Instance:
    nu = tuple(float(v) for v in np.round(rng.uniform(0.2, 2.0, n), 3))
    nu0 = float(np.round(rng.uniform(0.5, 2.0), 3))
    revenues = tuple(float(r) for r in np.round(rng.uniform(0.5, 10.0, n), 3))
    groups = _groups(rng, n, m)
    gutils = tuple(MNLGroupShare(t, nu, nu0) for t in range(m))
    return Instance(n, groups, MNLRevenue(revenues, nu, nu0), gutils, AllSubsets())


def random_mnl(seed: int, n_max: int = 8) -> Case:
    rng = _rng("mnl", seed)
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, 4))
    inst = mnl_instance(rng, n, m)
    return Case(inst, _lower_bounds(rng, anchor_expectations(rng, inst)), "mnl", seed)


def random_box(seed: int) -> Case:
    rng = _rng("box", seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(1, 3))
    k = int(rng.integers(1, min(4, n) + 1))
    f = _modular(rng, n) if rng.random() < 0.5 else _coverage(rng, n)
    inst = _set_instance(rng, n, m, k, f, "mixed")
    anchor = anchor_expectations(rng, inst)
    alpha = np.round(anchor * rng.uniform(0.3, 1.0, m), 4)
    beta = np.round(anchor + rng.uniform(0.0, 1.0, m), 4)
    return Case(inst, Box(tuple(map(float, alpha)), tuple(map(float, beta))), "box", seed)


def random_pairwise(seed: int) -> Case:
    rng = _rng("pairwise", seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(2, 4))
    k = int(rng.integers(1, min(4, n) + 1))
    f = _modular(rng, n) if rng.random() < 0.5 else _coverage(rng, n)
    inst = _set_instance(rng, n, m, k, f, "count")
    anchor = anchor_expectations(rng, inst)
    gamma = np.zeros((m, m))
    for t in range(m):
        for t2 in range(m):
            if t != t2:
                gamma[t, t2] = round(max(0.0, anchor[t] - anchor[t2]) + rng.uniform(0.0, 0.5), 4)
    return Case(inst, Pairwise(tuple(tuple(map(float, row)) for row in gamma)), "pairwise", seed)


def random_infeasible(seed: int) -> Case:
    """A lower bound on some group above anything a single selection can reach."""
    rng = _rng("infeasible", seed)
    base = random_p0(seed)
    inst = base.instance
    t = int(rng.integers(inst.m))
    # every group utility here is at most the total weight it could cover
    spec = inst.group_utils[t]
    if isinstance(spec, GroupCount):
        top = float(len(inst.groups.members[t]))
    else:
        top = float(sum(spec.element_weights))
    alpha = list(base.fairness.alpha)
    alpha[t] = round(1.5 * top + 0.5, 4)
    return Case(inst, LowerBounds(tuple(alpha)), "infeasible", seed)


def random_sequential(seed: int, n: int | None = None) -> Case:
    """Permutation instance with n <= 5 and monotone submodular levels."""
    rng = _rng("sequential", seed)
    n = n or int(rng.integers(2, 6))
    m = int(rng.integers(1, 3))
    groups = _groups(rng, n, m)

    def mix(components):
        lambdas = tuple(float(v) for v in np.round(rng.uniform(0.0, 1.0, n), 3))
        return SequentialMix(lambdas, tuple(components))

    f = mix(_coverage(rng, n) if rng.random() < 0.5 else _modular(rng, n) for _ in range(n))
    gutils = tuple(mix(GroupCount(t) for _ in range(n)) for t in range(m))
    inst = Instance(n, groups, f, gutils, Permutations())
    return Case(inst, _lower_bounds(rng, anchor_expectations(rng, inst)), "sequential", seed)


GENERATORS = {
    "p0": random_p0,
    "coverage": random_coverage,
    "mnl": random_mnl,
    "box": random_box,
    "pairwise": random_pairwise,
    "infeasible": random_infeasible,
    "sequential": random_sequential,
}


def generate(kind: str, seed: int) -> Case:
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; choose from {', '.join(KINDS)}")
    return GENERATORS[kind](seed)
