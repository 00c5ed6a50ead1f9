import pytest
from hypothesis import given, strategies as st

from zeus_auth import (
    ALWAYS,
    Aggregator,
    DefiningProperty,
    FactForm,
    LabelHasPrefix,
    MagnitudeInRange,
    MagnitudeRule,
    OperatorDef,
    add_fact,
    add_operator,
    apply_operator,
    domains_comparable_at,
    make_domain,
    make_mapping,
    map_facts,
    outcome,
)
from zeus_auth.domain import MAGNITUDE_MAX, MAGNITUDE_MIN, absorb_fact, add_facts
from zeus_auth.errors import (
    ClosureViolation,
    DomainMismatch,
    DuplicateFactId,
    IndexOutOfRange,
    InvalidIdentifier,
    MagnitudeOverflow,
    MappingIncomplete,
    MappingInconsistent,
    NotAMember,
    PropertyViolation,
    UnknownOperator,
)

from conftest import domain_of, fact


def test_make_domain_is_empty():
    d = make_domain("mkt", "Markets", ALWAYS)
    assert len(d) == 0 and d.operators == ()
    assert make_domain("spc", "Space exploration").name == "Space exploration"


@pytest.mark.parametrize("bad", ["", "has space", "tab\tid", None])
def test_make_domain_rejects_bad_ids(bad):
    with pytest.raises(InvalidIdentifier):
        make_domain(bad, "x")


def test_add_fact_preserves_order_and_checks():
    d = make_domain("mkt", "Markets")
    d = add_fact(d, fact("avenue-21", 4, "mkt", "21st Avenue Road"))
    assert [f.label for f in d.native_facts] == ["21st Avenue Road"]
    d = add_fact(d, fact("coles", 7, "mkt"))
    assert [f.fact_id for f in d.native_facts] == ["avenue-21", "coles"]

    with pytest.raises(DuplicateFactId):
        add_fact(d, fact("coles", 1, "mkt"))
    with pytest.raises(DomainMismatch):
        add_fact(d, fact("x", 1, "spc"))

    small = make_domain("s", "s", DefiningProperty.of(MagnitudeInRange(0, 10)))
    with pytest.raises(PropertyViolation):
        add_fact(small, fact("big", 50, "s"))


def test_property_atoms():
    f = fact("a", 10, label="Road 5")
    assert MagnitudeInRange(0, 10).holds(f)
    assert not MagnitudeInRange(0, 10, inclusive=False).holds(f)
    assert LabelHasPrefix("Road").holds(f)
    assert not LabelHasPrefix("road").holds(f)
    assert DefiningProperty().holds(f)
    assert not DefiningProperty.of(LabelHasPrefix("Road"), MagnitudeInRange(11, 20)).holds(f)


@pytest.mark.parametrize("m", [7, 0, -3])
def test_outcome_is_the_magnitude(m):
    assert outcome(fact("f", m)) == m


def test_magnitude_range_is_enforced():
    fact("lo", MAGNITUDE_MIN)
    fact("hi", MAGNITUDE_MAX)
    with pytest.raises(MagnitudeOverflow):
        fact("over", 2**62)
    with pytest.raises(MagnitudeOverflow):
        fact("under", -(2**62) - 1)
    with pytest.raises(TypeError):
        fact("b", True)


def _with_ops(d, *rules):
    for r in rules:
        d = add_operator(d, OperatorDef(r.value.lower(), r))
    return d


def test_apply_operator_rules():
    d = _with_ops(domain_of("d", 3, 4), *MagnitudeRule)
    a, b = d.native_facts
    assert apply_operator(d, "sum", a, b).magnitude == 7
    assert apply_operator(d, "min", a, b).magnitude == 3
    assert apply_operator(d, "max", a, b).magnitude == 4
    assert apply_operator(d, "first", b, a).magnitude == 4
    r = apply_operator(d, "sum", a, b)
    assert r.form is FactForm.ANSWER and r.domain_id == "d"
    assert r == apply_operator(d, "sum", a, b)
    assert r.fact_id == "sum(d0,d1)"


def test_apply_operator_errors():
    bounded = make_domain("d", "d", DefiningProperty.of(MagnitudeInRange(0, 10)))
    bounded = _with_ops(add_facts(bounded, [fact("a", 6), fact("b", 6)]), MagnitudeRule.SUM)
    a, b = bounded.native_facts
    # 6 + 6 = 12 lies outside [0, 10]
    with pytest.raises(ClosureViolation):
        apply_operator(bounded, "sum", a, b)
    with pytest.raises(UnknownOperator):
        apply_operator(bounded, "min", a, b)
    with pytest.raises(NotAMember):
        apply_operator(bounded, "sum", a, fact("stranger", 1))

    huge = _with_ops(domain_of("h", MAGNITUDE_MAX, 1), MagnitudeRule.SUM)
    with pytest.raises(MagnitudeOverflow):
        apply_operator(huge, "sum", *huge.native_facts)


def test_absorbed_facts_count_as_members():
    d = _with_ops(domain_of("d", 1, 2), MagnitudeRule.SUM)
    foreign = fact("fp", 0, "resultant")
    d2 = absorb_fact(d, foreign)
    assert d2.native_facts == d.native_facts
    assert absorb_fact(d2, foreign) == d2
    assert apply_operator(d2, "sum", d2.native_facts[0], foreign).magnitude == 1


@given(st.lists(st.integers(-50, 50), max_size=8), st.integers(-20, 0), st.integers(0, 20))
def test_property_soundness_and_order_determinism(mags, lo, hi):
    prop = DefiningProperty.of(MagnitudeInRange(lo, hi))

    def build():
        d = make_domain("p", "p", prop)
        for n, m in enumerate(mags):
            try:
                d = add_fact(d, fact(f"f{n}", m, "p"))
            except PropertyViolation:
                pass
        return d

    d = build()
    assert all(prop.holds(f) for f in d.native_facts)
    assert d == build()


@given(st.integers(-30, 30), st.integers(-30, 30))
def test_closure_never_returns_a_violating_fact(x, y):
    prop = DefiningProperty.of(MagnitudeInRange(-30, 30))
    d = _with_ops(add_facts(make_domain("d", "d", prop), [fact("a", x), fact("b", y)]), MagnitudeRule.SUM)
    try:
        r = apply_operator(d, "sum", *d.native_facts)
    except ClosureViolation:
        assert not -30 <= x + y <= 30
    else:
        assert prop.holds(r)


def test_domains_comparable_at():
    d_i, d_j = domain_of("i", 5, 5), domain_of("j", 5, 7)
    assert domains_comparable_at(d_i, d_j, 0)
    assert not domains_comparable_at(d_i, d_j, 1)
    assert domains_comparable_at(d_i, d_j, 1, epsilon=2)
    assert not domains_comparable_at(d_i, d_j, 1, epsilon=1)
    with pytest.raises(IndexOutOfRange):
        domains_comparable_at(d_i, d_j, 2)


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=5),
       st.lists(st.integers(-9, 9), min_size=1, max_size=5), st.integers(0, 4))
def test_comparability_is_symmetric(a, b, eps):
    d_i, d_j = domain_of("i", *a), domain_of("j", *b)
    for k in range(min(len(a), len(b))):
        assert domains_comparable_at(d_i, d_j, k, eps) == domains_comparable_at(d_j, d_i, k, eps)


def _mapping_domains():
    src = add_facts(make_domain("src", "src"), [fact("A", 5, "src"), fact("B", 2, "src"),
                                                 fact("C", 3, "src")])
    tgt = add_facts(make_domain("tgt", "tgt"), [fact("X", 5, "tgt"), fact("Y", 8, "tgt")])
    return src, tgt


def test_map_facts():
    src, tgt = _mapping_domains()
    A, B, C = src.native_facts
    ident = make_mapping("id", src, tgt, Aggregator.IDENTITY, [(["A"], "X")])
    assert map_facts(ident, [A]).fact_id == "X"

    summed = make_mapping("sum", src, tgt, Aggregator.SUM, [(["B", "C"], "X"), (["A", "C"], "Y")])
    assert map_facts(summed, [C, B]).fact_id == "X"
    assert map_facts(summed, [A, C]).magnitude == 8
    with pytest.raises(MappingIncomplete):
        map_facts(summed, [A, B])
    with pytest.raises(DomainMismatch):
        map_facts(summed, [tgt.native_facts[0]])


def test_mapping_conservation_is_checked():
    src, tgt = _mapping_domains()
    with pytest.raises(MappingInconsistent):
        make_mapping("bad", src, tgt, Aggregator.SUM, [(["A", "B"], "X")])
    with pytest.raises(ValueError):
        make_mapping("bad", src, tgt, Aggregator.IDENTITY, [(["B", "C"], "X")])
    m = make_mapping("mx", src, tgt, Aggregator.MAX, [(["A", "B", "C"], "X")])
    for e in m.entries:
        mags = [src.find(s).magnitude for s in e.sources]
        assert m.aggregator.apply(mags) == e.target.magnitude


def test_map_facts_rechecks_at_lookup_time():
    src, tgt = _mapping_domains()
    m = make_mapping("id", src, tgt, Aggregator.IDENTITY, [(["A"], "X")])
    forged = fact("A", 6, "src")
    with pytest.raises(MappingInconsistent):
        map_facts(m, [forged])
    assert map_facts(m, [forged], epsilon=1).fact_id == "X"
