from itertools import product as cartesian

import pytest
from hypothesis import given

from fsforms import parse
from fsforms import calculus as calc
from fsforms.algebra import DEFAULT_REGISTRY as REG, DegreeError, Expression, koszul, mul, trace
from fsforms.dsl import DSLError
from strategies import expressions, monomials

YM = calc.YM.of(REG)


def words(alphabet, max_len):
    for n in range(1, max_len + 1):
        for w in cartesian(alphabet, repeat=n):
            yield Expression.from_factors([REG[s] for s in w])


# -- frozen examples ----------------------------------------------------------------


@pytest.mark.parametrize("src, expected", [
    ("delta(delta(A))", "0"),
    ("delta(tr(E*delta(A)))", "tr(delta(E)*delta(A))"),
    ("delta(bi)", "-bi*delta(b)*bi"),
    ("d(d(A))", "0"),
    ("d(tr(E*w))", "tr(d(E)*w) + tr(E*d(w))"),
    ("D(X)", "d(X) + bracket(A, X)"),
    ("D(D(X))", "bracket(d(A) + 1/2*bracket(A, A), X)"),
    ("onshell(D(E))", "0"),
    ("onshell(tr(w*D(E)))", "0"),
    ("dH(A)", "delta(A) + bracket(w, A) - d(w)"),
    ("s(s(A))", "0"),
    ("s(s(E))", "0"),
    ("s(w)", "-1/2*bracket(w, w)"),
    ("curv()", "delta(w) + 1/2*bracket(w, w)"),
    ("expandF(F)", "curv()"),
    ("iota(X, w)", "X"),
    ("iota(X, dH(A))", "0"),
    ("iota(X, dH(E))", "0"),
    ("iota(X, F)", "0"),
    ("iota(X, curv())", "0"),
    ("gauge(E)", "b*E*bi"),
    ("flat(delta(w))", "-1/2*bracket(w, w)"),
    ("stokes(intS(d(tr(E*w))))", "intC(tr(E*w))"),
    ("stokes(intS(tr(E*delta(A))))", "intS(tr(E*delta(A)))"),
    ("stokes(intS(d(delta(tr(E*w)))))", "intC(delta(tr(E*w)))"),
    ("stokes(intS(tr(d(E)*w)))", "intC(tr(E*w)) - intS(tr(E*d(w)))"),
])
def test_frozen_examples(src, expected):
    assert parse(src) == parse(expected)


def test_abelian_restriction_of_curvature():
    # dropping every bracket term leaves delta w
    F = calc.curvature(ym=YM)
    abelian = Expression({k: c for k, c in F.terms.items() if len(k.word) == 1}, F.valuedness,
                         F.bidegree)
    assert abelian == parse("delta(w)")


def test_opaque_and_expanded_curvature_agree():
    assert calc.expand_curvature(calc.curvature(ym=YM, opaque=True), YM) == calc.curvature(ym=YM)
    lhs = calc.delta_H(calc.delta_H(parse("E"), YM), YM)
    assert lhs == parse("bracket(curv(), E)")
    assert lhs == calc.expand_curvature(parse("bracket(F, E)"), YM)


def test_integration_errors():
    with pytest.raises(DSLError, match="2-dimensional"):
        parse("intC(tr(E*delta(A)))")
    with pytest.raises(DegreeError):
        calc.integrate(parse("tr(E*w)"), "S")
    with pytest.raises(DSLError):
        parse("d(intS(tr(E*delta(A))))")


def test_contraction_of_field_space_zero_form_rejected():
    with pytest.raises(DSLError, match="nothing to contract"):
        parse("iota(X, A)")
    with pytest.raises(DegreeError):
        calc.contract_fundamental(REG["X"], parse("E"), YM)


def test_gauge_substitution_requires_declared_group_atom():
    from fsforms.algebra import Registry
    reg = Registry()
    reg.declare("A", (0, 1))
    with pytest.raises(Exception):
        calc.GaugeSubstitution.of(reg, "b")


def test_lift_corners_matches_stokes():
    e = parse("intS(tr(E*delta(A))) - intC(tr(E*w))")
    assert calc.lift_corners(e) == parse("intS(tr(E*delta(A)) - d(tr(E*w)))")
    assert calc.stokes(calc.lift_corners(e)) == e


# -- exhaustive nilpotency on short words -------------------------------------------


@pytest.mark.parametrize("op", ["delta", "d", "s"])
def test_nilpotent_on_short_words(op):
    fn = {"delta": calc.delta, "d": calc.d, "s": lambda e: calc.brst_s(e, YM)}[op]
    for e in words("AEwF", 4):
        assert fn(fn(e)).is_zero(), e
        assert fn(fn(trace(e))).is_zero(), e


def test_delta_d_commute_on_short_words():
    for e in words("AEwF", 4):
        assert calc.d(calc.delta(e)) == calc.delta(calc.d(e))


# -- properties ------------------------------------------------------------------------


@given(expressions())
def test_nilpotency_random(e):
    assert calc.delta(calc.delta(e)).is_zero()
    assert calc.d(calc.d(e)).is_zero()
    assert calc.brst_s(calc.brst_s(e, YM), YM).is_zero()


@given(expressions())
def test_d_delta_commute(e):
    assert calc.d(calc.delta(e)) == calc.delta(calc.d(e))


@given(expressions())
def test_horizontal_is_delta_minus_s(e):
    assert calc.delta_H(e, YM) == calc.delta(e) - calc.brst_s(e, YM)


def _leibniz(op, deg, a, b):
    sgn = -1 if koszul(deg, a.bidegree) else 1
    return mul(op(a), b) + mul(a, op(b)).scale(sgn)


@given(monomials(), monomials())
def test_leibniz_delta(a, b):
    assert calc.delta(mul(a, b)) == _leibniz(calc.delta, (1, 0), a, b)


@given(monomials(), monomials())
def test_leibniz_d(a, b):
    assert calc.d(mul(a, b)) == _leibniz(calc.d, (0, 1), a, b)


@given(monomials(), monomials())
def test_leibniz_s(a, b):
    s = lambda e: calc.brst_s(e, YM)  # noqa: E731
    assert s(mul(a, b)) == _leibniz(s, (1, 0), a, b)


@given(monomials(), monomials())
def test_leibniz_covariant_D(a, b):
    D = lambda e: calc.covariant_D(e, YM)  # noqa: E731
    assert D(mul(a, b)) == _leibniz(D, (0, 1), a, b)


@given(monomials(symbols=["A", "E", "w"]))
def test_contraction_kills_horizontal_variations(e):
    if e.bidegree.f == 0:
        h = calc.delta_H(e, YM)
        assert calc.contract_fundamental(REG["X"], h, YM).is_zero()


@given(expressions())
def test_stokes_idempotent(e):
    for dom in ("S", "C"):
        try:
            integrated = calc.integrate(trace(e), dom)
        except DegreeError:
            continue
        once = calc.stokes(integrated)
        assert calc.stokes(once) == once


@given(monomials(max_size=2, symbols=["E", "w", "A"]))
def test_stokes_moves_exact_terms(e):
    t = trace(e)
    if t.is_zero() or t.bidegree.s != 2:
        return
    # the bulk integral of d(t) equals the corner integral of t, modulo exact corner terms
    assert calc.stokes(calc.integrate(calc.d(t), "S")) == calc.stokes(calc.integrate(t, "C"))


def test_gauge_substitution_commutes_with_d_on_adjoint_fields():
    # d(b E bi) expands with the group relations, then matches the substituted d
    lhs = calc.d(parse("gauge(E)"))
    rhs = parse("d(b)*E*bi + b*d(E)*bi - b*E*bi*d(b)*bi")
    assert lhs == rhs


def test_stokes_reduces_corner_primitive():
    # tr(d(A)*delta(w)) and tr(A*delta(d(w))) differ by an exact corner form
    t = parse("tr(delta(d(w))*A)")
    bulk = calc.stokes(calc.integrate(calc.d(t), "S"))
    assert bulk == calc.stokes(calc.integrate(t, "C"))
    assert calc.stokes(parse("intC(tr(d(A)*delta(w)))")) == calc.stokes(parse("intC(tr(A*delta(d(w))))"))
