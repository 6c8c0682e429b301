from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairselect.errors import FamilyTooLarge, InvalidSelection
from fairselect.model import (
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
    check_fairness,
    enumerate_feasible,
    eval_global,
    eval_group,
    expected_utilities,
    family_size,
    validate_instance,
)


def mnl_pair(revenues=(4.0, 1.0), nu=(1.0, 1.0), nu0=1.0, groups=((0,), (1,))):
    gs = GroupStructure.from_lists(groups)
    gutils = tuple(MNLGroupShare(t, nu, nu0) for t in range(gs.m))
    return Instance(len(nu), gs, MNLRevenue(revenues, nu, nu0), gutils, AllSubsets())


# ---- validate_instance ----------------------------------------------------

def test_well_formed_instance_has_no_violations(i1):
    assert validate_instance(i1) == []


def test_group_utils_length_must_match_group_count():
    inst = Instance(3, GroupStructure.from_lists([[0], [1, 2]]), Modular((3.0, 2.0, 1.0)),
                    (GroupCount(0),), Cardinality(2))
    messages = [v.message for v in validate_instance(inst)]
    assert any("group_utils length" in msg and "≠ m" in msg for msg in messages)


def test_zero_no_purchase_weight_is_rejected():
    inst = mnl_pair(nu0=0.0)
    assert any(v.message == "no-purchase weight must be positive" for v in validate_instance(inst))


def test_zero_preference_weight_is_rejected():
    inst = mnl_pair(nu=(1.0, 0.0))
    assert any(v.path.endswith(".nu") for v in validate_instance(inst))


@pytest.mark.parametrize("bad, fragment", [
    (Instance(3, GroupStructure.from_lists([[0, 5]]), Modular((1.0, 1.0, 1.0)), (GroupCount(0),),
              Cardinality(2)), "outside"),
    (Instance(3, GroupStructure.from_lists([[0]]), Modular((1.0, -1.0, 1.0)), (GroupCount(0),),
              Cardinality(2)), "nonnegative"),
    (Instance(3, GroupStructure.from_lists([[0]]), Modular((1.0, 1.0, 1.0)), (GroupCount(0),),
              Cardinality(4)), "cardinality"),
    (Instance(3, GroupStructure.from_lists([[0]]), Modular((1.0, 1.0, 1.0)), (GroupCount(0),),
              Permutations()), "sequential"),
    (Instance(2, GroupStructure.from_lists([[0]]), Modular((1.0, 1.0)), (GroupCount(3),),
              Cardinality(1)), "group index"),
    (Instance(2, GroupStructure(()), Modular((1.0, 1.0)), (), Cardinality(1)), "at least one group"),
])
def test_each_invariant_breach_is_reported_with_a_path(bad, fragment):
    violations = validate_instance(bad)
    assert violations
    assert any(fragment in v.message for v in violations)
    assert all(v.path for v in violations)


def test_fairness_checks():
    assert check_fairness(LowerBounds((0.5, 1.0)), 2) == []
    assert check_fairness(LowerBounds((0.5,)), 2)
    assert check_fairness(Box((1.0, 0.0), (0.5, 1.0)), 2)
    assert check_fairness(Pairwise(((0.0, 1.0), (-1.0, 0.0))), 2)
    # the diagonal is ignored, even if negative
    assert check_fairness(Pairwise(((-5.0, 1.0), (1.0, 0.0))), 2) == []


# ---- evaluation -------------------------------------------------------------

def test_mnl_revenue_single_item():
    assert eval_global(mnl_pair(), (0,)) == pytest.approx(2.0)


def test_mnl_revenue_agrees_with_hand_enumeration():
    inst = mnl_pair()
    expected = {(): 0.0, (0,): 2.0, (1,): 0.5, (0, 1): 5.0 / 3.0}
    for sel, val in expected.items():
        assert eval_global(inst, sel) == pytest.approx(val, abs=1e-12)


def test_empty_selection_is_worth_nothing(i1):
    cov = WeightedCoverage((1.0, 2.0), (frozenset({0}), frozenset({1}), frozenset({0, 1})))
    for spec in (Modular((3.0, 2.0, 1.0)), cov, GroupCount(1), MNLRevenue((1.0, 2.0, 3.0), (1.0,) * 3, 1.0),
                 MNLGroupShare(0, (1.0,) * 3, 1.0)):
        assert spec.evaluate((), i1.groups) == 0.0


def test_modular_sum(i1):
    assert eval_global(i1, (0, 1)) == 5.0


def test_group_count(i1):
    assert eval_group(i1, 1, (0, 1)) == 1.0
    assert eval_group(i1, 0, ()) == 0.0


def test_mnl_group_share():
    inst = mnl_pair()
    assert eval_group(inst, 1, (0, 1)) == pytest.approx(1.0 / 3.0)


def test_invalid_group_index_raises(i1):
    with pytest.raises(IndexError):
        eval_group(i1, 2, (0,))


def test_selection_outside_family_raises(i1):
    with pytest.raises(InvalidSelection):
        eval_global(i1, (0, 1, 2))
    with pytest.raises(InvalidSelection):
        eval_global(i1, (1, 0))


def test_sequential_mix_sums_weighted_prefix_values():
    groups = GroupStructure.from_lists([[0, 1]])
    f = SequentialMix((1.0, 0.5), (Modular((1.0, 5.0)), Modular((1.0, 5.0))))
    inst = Instance(2, groups, f, (SequentialMix((0.0, 0.0), (GroupCount(0), GroupCount(0))),), Permutations())
    assert eval_global(inst, (1, 0)) == pytest.approx(5.0 + 0.5 * 6.0)
    assert eval_global(inst, (0, 1)) == pytest.approx(1.0 + 0.5 * 6.0)


# ---- enumeration --------------------------------------------------------------

def test_cardinality_enumeration_order(i1):
    assert enumerate_feasible(i1, 100) == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]


def test_all_subsets_count():
    assert len(enumerate_feasible(mnl_pair(), 100)) == 4


def test_permutation_enumeration_refuses_past_cap():
    inst = Instance(12, GroupStructure.from_lists([[0]]), SequentialMix((), ()),
                    (SequentialMix((), ()),), Permutations())
    assert family_size(inst) == math.factorial(12)
    with pytest.raises(FamilyTooLarge, match="479001600"):
        enumerate_feasible(inst, 10**6)


def test_permutations_are_all_orderings():
    inst = Instance(3, GroupStructure.from_lists([[0]]), SequentialMix((), ()),
                    (SequentialMix((), ()),), Permutations())
    assert enumerate_feasible(inst, 100) == list(itertools.permutations(range(3)))


# ---- expected utilities -----------------------------------------------------------

def test_point_mass_expectation(i1):
    value, groups = expected_utilities(i1, SolutionDistribution((((0, 2), 1.0),)))
    assert value == 4.0
    assert groups.tolist() == [1.0, 1.0]


def test_empty_distribution_expectation(i1):
    value, groups = expected_utilities(i1, SolutionDistribution())
    assert value == 0.0 and groups.tolist() == [0.0, 0.0]


def test_half_half_expectation():
    inst = Instance(2, GroupStructure.from_lists([[0, 1]]), Modular((3.0, 2.0)), (GroupCount(0),), Cardinality(1))
    value, _ = expected_utilities(inst, SolutionDistribution.from_pairs([((0,), 0.5), ((1,), 0.5)]))
    assert value == pytest.approx(2.5)


def test_distribution_check_flags_excess_mass(i1):
    dist = SolutionDistribution((((0,), 0.6), ((1,), 0.5)))
    assert any("exceeds 1" in v.message for v in dist.check(i1))


# ---- properties -------------------------------------------------------------------

coverage_specs = st.integers(2, 10).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.floats(0.0, 5.0), min_size=1, max_size=8),
).flatmap(lambda nw: st.tuples(
    st.just(nw[0]),
    st.just(tuple(nw[1])),
    st.lists(st.frozensets(st.integers(0, len(nw[1]) - 1), max_size=len(nw[1])),
             min_size=nw[0], max_size=nw[0]),
)))


def _subsets(n):
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]


@settings(max_examples=40, deadline=None)
@given(coverage_specs, st.data())
def test_coverage_is_monotone_and_submodular(spec, data):
    n, weights, covers = spec
    f = WeightedCoverage(weights, tuple(covers))
    groups = GroupStructure.from_lists([[0]])
    Y = data.draw(st.frozensets(st.integers(0, n - 1)))
    X = data.draw(st.frozensets(st.sampled_from(sorted(Y)))) if Y else frozenset()
    for e in range(n):
        if e in Y:
            continue
        gain_x = f.evaluate(X | {e}, groups) - f.evaluate(X, groups)
        gain_y = f.evaluate(Y | {e}, groups) - f.evaluate(Y, groups)
        assert gain_x >= gain_y - 1e-9
        assert gain_x >= -1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=6), st.data())
def test_flagged_specs_are_submodular_on_all_pairs(weights, data):
    n = len(weights)
    groups = GroupStructure.from_lists([list(range(0, n, 2))])
    for spec in (Modular(tuple(weights)), GroupCount(0)):
        assert spec.monotone and spec.submodular
        for Y in _subsets(n):
            for X in (s for s in _subsets(n) if s <= Y):
                for e in set(range(n)) - Y:
                    gx = spec.evaluate(X | {e}, groups) - spec.evaluate(X, groups)
                    gy = spec.evaluate(Y | {e}, groups) - spec.evaluate(Y, groups)
                    assert gx >= gy - 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=10), st.floats(0.01, 10.0), st.data())
def test_mnl_probabilities_sum_to_one(nu, nu0, data):
    spec = MNLRevenue(tuple([1.0] * len(nu)), tuple(nu), nu0)
    sel = data.draw(st.frozensets(st.integers(0, len(nu) - 1)))
    probs, none = spec.purchase_probabilities(sorted(sel))
    assert abs(sum(probs.values()) + none - 1.0) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=7, max_size=7), st.lists(st.floats(0.0, 1.0), min_size=7, max_size=7),
       st.floats(0.0, 1.0))
def test_expected_utilities_is_linear(a, b, lam):
    inst = Instance(3, GroupStructure.from_lists([[0], [1, 2]]), Modular((3.0, 2.0, 1.0)),
                    (GroupCount(0), GroupCount(1)), Cardinality(2))
    sets = enumerate_feasible(inst, 100)
    a = np.array(a) / max(1.0, sum(a))
    b = np.array(b) / max(1.0, sum(b))
    mix = lam * a + (1 - lam) * b
    da, db, dm = (SolutionDistribution(tuple(zip(sets, map(float, x)))) for x in (a, b, mix))
    (va, ga), (vb, gb), (vm, gm) = (expected_utilities(inst, d) for d in (da, db, dm))
    assert vm == pytest.approx(lam * va + (1 - lam) * vb, abs=1e-12)
    assert np.allclose(gm, lam * ga + (1 - lam) * gb, atol=1e-12)
