import pytest

from fsforms import parse, pretty
from fsforms.dsl import DSLError, tokenize


def test_tokenize_positions():
    toks = tokenize("tr(E*\n  w)")
    w = [t for t in toks if t.text == "w"][0]
    assert (w.line, w.column) == (2, 3)


@pytest.mark.parametrize("src, fragment, where", [
    ("E +", "expected a factor", (1, 4)),
    ("tr(E*w", "expected ')'", (1, 7)),
    ("Q*E", "undeclared atom 'Q'", (1, 1)),
    ("E $ w", "unexpected character", (1, 3)),
    ("bracket(E)", "expected 2 argument", (1, 1)),
    ("E\n + A", "inhomogeneous", (2, 2)),
])
def test_errors_carry_position(src, fragment, where):
    with pytest.raises(DSLError) as info:
        parse(src)
    assert fragment in str(info.value)
    assert (info.value.line, info.value.column) == where


def test_macros():
    env = {"Theta": parse("intS(tr(E*delta(A)))")}
    assert parse("delta(Theta)", env=env) == parse("intS(tr(delta(E)*delta(A)))")


def test_rational_coefficients():
    assert parse("3/6*E") == parse("1/2*E")
    assert parse("(-1/2)*E") == parse("-1/2*E")
    assert parse("2*(3)*E") == parse("6*E")
    assert parse("2*(E + E)") == parse("4*E")


def test_pretty_of_zero_and_constants():
    assert pretty(parse("0")) == "0"
    assert pretty(parse("b*bi")) == "1"
    assert parse("0").is_zero()
