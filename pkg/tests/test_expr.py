from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lbflow.expr import (
    ParseError,
    SingularityError,
    Zero,
    cos,
    diff,
    evaluate,
    is_zero,
    param,
    parse,
    sin,
    substitute,
    u,
    x,
)

from .strategies import polynomials, rationals, small_fracs


def P(s, **kw):
    return parse(s, n=kw.pop("n", 1), m=kw.pop("m", 2), **kw)


def test_parse_basic():
    e = P("x1 + u1[1]^2")
    assert e == x(1) + u(1, (1,)) ** 2
    a = P("u2[2]").atom
    assert (a.kind, a.L, a.alpha) == ("jet", 2, (2,))


@pytest.mark.parametrize("text, pos", [("u1[", 3), ("x1 +", 4), ("(x1", 3), ("x1 $ 2", 3)])
def test_parse_error_offsets(text, pos):
    with pytest.raises(ParseError) as info:
        P(text)
    assert info.value.pos == pos


def test_parse_signature_errors():
    with pytest.raises(ParseError):
        P("u3[1]")
    with pytest.raises(ParseError):
        P("x2")
    with pytest.raises(ParseError):
        P("u1[1,0]")
    with pytest.raises(ParseError):
        P("foo + 1")


def test_parse_multiindex_n2():
    e = parse("u1[1,0]*u1[0,1]", n=2, m=1)
    assert sorted(a.alpha for a in e.jets()) == [(0, 1), (1, 0)]


def test_diff_examples():
    y = u(1, (1,))
    assert diff(y ** 2, y) == 2 * y
    assert diff(sin(x(1)), x(1)) == cos(x(1))
    assert diff(x(1), u(1, (0,))) == 0


def test_is_zero_examples():
    a, b = P("x1*u1[0]"), P("u2[1]^3")
    assert is_zero((a + b) - (b + a)) is Zero.ZERO
    assert is_zero(u(1, (1,))) is Zero.NONZERO
    assert is_zero(sin(x(1)) ** 2 + cos(x(1)) ** 2 - 1) is Zero.UNKNOWN
    assert is_zero(sin(x(1)) - x(1)) is Zero.NONZERO


def test_eval_and_substitute():
    assert evaluate(P("x1 + u1[1]"), {"x1": 1, "u1[1]": 2}) == 3
    t = param("t")
    e = substitute(P("u2[1]/u1[1]"), {u(1, (1,)): 1 + t})
    assert e == u(2, (1,)) / (1 + t)
    with pytest.raises(SingularityError):
        evaluate(P("u2[1]/u1[1]"), {"u1[1]": 0, "u2[1]": 1})


def test_exact_rational_arithmetic():
    e = P("1/3 + 1/6")
    assert e.is_const and e.const_value() == Fraction(1, 2)
    assert evaluate(P("u1[1]/3"), {"u1[1]": 1}) == Fraction(1, 3)


def test_decimal_literal_is_exact():
    assert P("0.25").const_value() == Fraction(1, 4)


def test_printer_examples():
    assert str(P("(u2[1]/u1[1])^2/2")) == "1/2*u2[1]^2/u1[1]^2"
    assert str(P("x1 - 2*u1[0]")) in ("x1 - 2*u1[0]", "-2*u1[0] + x1")


@given(rationals())
def test_print_parse_roundtrip(e):
    assert P(str(e)) == e


@given(polynomials(), polynomials(), polynomials())
def test_ring_axioms(a, b, c):
    assert is_zero(a * (b + c) - (a * b + a * c)) is Zero.ZERO
    assert is_zero((a + b) - (b + a)) is Zero.ZERO
    assert is_zero((a * b) * c - a * (b * c)) is Zero.ZERO


@given(rationals(), rationals())
def test_product_rule(a, b):
    v = u(1, (1,))
    assert is_zero(diff(a * b, v) - (diff(a, v) * b + a * diff(b, v))) is Zero.ZERO


@given(polynomials(), polynomials(), st.lists(small_fracs, min_size=7, max_size=7))
def test_evaluation_is_a_homomorphism(a, b, vals):
    names = ["x1", "u1[0]", "u1[1]", "u1[2]", "u2[0]", "u2[1]", "u2[2]"]
    env = dict(zip(names, vals))
    assert evaluate(a * b + a, env) == evaluate(a, env) * evaluate(b, env) + evaluate(a, env)


@given(rationals())
def test_substitute_identity(e):
    v = u(1, (1,))
    assert substitute(e, {v: v}) == e
