import itertools

import pytest
from hypothesis import given, strategies as st

from zeus_auth import (
    DIFFERENCE,
    SUM,
    Aggregator,
    Combiner,
    CombinerKind,
    DefiningProperty,
    LabelHasPrefix,
    TargetSet,
    combine,
    in_target,
    joint_match,
    make_mapping,
)
from zeus_auth.domain import MAGNITUDE_MAX
from zeus_auth.errors import MagnitudeOverflow, MappingIncomplete

from conftest import domain_of, fact

mags = st.integers(-(2**40), 2**40)


@pytest.mark.parametrize("combiner,a,b,expected", [
    (DIFFERENCE, 5, 5, 0),
    (DIFFERENCE, 7, 5, 2),
    (SUM, 3, -3, 0),
])
def test_combine_examples(combiner, a, b, expected):
    assert combine(combiner, fact("k", a), fact("m", b), 0).magnitude == expected


def test_resultant_shape():
    f_p = combine(DIFFERENCE, fact("k", 1, "di", "moon"), fact("m", 1, "dj", "cream"), 4)
    assert f_p.domain_id == "resultant"
    assert f_p.label == "moon ⊗ cream"
    assert f_p.fact_id == "k*m@4"
    assert f_p != combine(DIFFERENCE, fact("k", 1, "di"), fact("m", 1, "dj"), 5)


def test_combine_overflow():
    with pytest.raises(MagnitudeOverflow):
        combine(SUM, fact("k", MAGNITUDE_MAX), fact("m", 1), 0)


def test_map_then_difference():
    spc = domain_of("spc", 4, 12)
    mkt = domain_of("mkt", 4, 9)
    m = make_mapping("s2m", spc, mkt, Aggregator.IDENTITY, [(["spc0"], "mkt0")])
    c = Combiner(CombinerKind.MAP_THEN_DIFFERENCE, "s2m")
    assert combine(c, mkt.native_facts[0], spc.native_facts[0], 0, [m]).magnitude == 0
    with pytest.raises(MappingIncomplete):
        combine(c, mkt.native_facts[0], spc.native_facts[1], 0, [m])
    with pytest.raises(MappingIncomplete):
        combine(c, mkt.native_facts[0], spc.native_facts[0], 0, [])
    # facts outside the mapping source are compared directly
    absorbed = fact("fp", 0, "resultant")
    assert combine(c, absorbed, absorbed, 1, [m]).magnitude == 0


@pytest.mark.parametrize("mag,accepted,expected", [(0, {0}, True), (2, {0}, False), (0, set(), False)])
def test_in_target(mag, accepted, expected):
    assert in_target(fact("p", mag), TargetSet(accepted)) is expected


def test_in_target_label_predicate():
    t = TargetSet({0}, DefiningProperty.of(LabelHasPrefix("moon")))
    assert in_target(fact("p", 0, label="moon ⊗ x"), t)
    assert not in_target(fact("p", 0, label="sun ⊗ x"), t)


@pytest.mark.parametrize("a,b", list(itertools.product([True, False], repeat=2)))
def test_joint_match_is_conjunction(a, b):
    assert joint_match(a, b) == (a and b)


def test_difference_against_zero_target_is_equality_on_a_grid():
    zero = TargetSet({0})
    for a, b in itertools.product(range(-6, 7), repeat=2):
        f_p = combine(DIFFERENCE, fact("a", a), fact("b", b), 0)
        assert in_target(f_p, zero) == (a == b)


@given(mags, mags)
def test_difference_antisymmetric_sum_commutes(a, b):
    fa, fb = fact("a", a), fact("b", b)
    assert combine(DIFFERENCE, fa, fb, 0).magnitude == -combine(DIFFERENCE, fb, fa, 0).magnitude
    assert combine(SUM, fa, fb, 0).magnitude == combine(SUM, fb, fa, 0).magnitude
    assert combine(SUM, fa, fb, 3) == combine(SUM, fa, fb, 3)


@given(mags, st.frozensets(st.integers(-5, 5)), st.frozensets(st.integers(-5, 5)),
       st.frozensets(st.integers(-5, 5)))
def test_joint_match_monotone_in_target_sets(m, t_i, t_j, extra):
    f_p = fact("p", m)
    before = joint_match(in_target(f_p, TargetSet(t_i)), in_target(f_p, TargetSet(t_j)))
    after = joint_match(in_target(f_p, TargetSet(t_i | extra)), in_target(f_p, TargetSet(t_j | extra)))
    assert after or not before
