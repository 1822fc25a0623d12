import pytest
from hypothesis import given

from lbflow.expr import Zero, is_zero, parse, u, x
from lbflow.jet import (
    MultiIndex,
    MultiPair,
    MultiPairSet,
    coordinate_list,
    prolong_set,
    pullback,
    total_derivative,
    total_derivative_multi,
)

from .strategies import polynomials


def y(L, *alpha):
    return u(L, alpha)


def test_total_derivative_examples():
    assert total_derivative(y(1, 0)) == y(1, 1)
    assert total_derivative(x(1)) == 1
    e = y(1, 1) * y(2, 1)
    assert total_derivative(e) == y(1, 2) * y(2, 1) + y(1, 1) * y(2, 2)


def test_total_derivative_multi():
    assert total_derivative_multi(y(1, 0), (2,)) == y(1, 2)
    assert total_derivative_multi(u(1, (0, 0)), (1, 1)) == u(1, (1, 1))


def test_total_derivative_commutes_n2():
    e = parse("x1*u1[1,0]^2 + x2*u1[0,1]*u1[0,0] + u1[2,1]", n=2, m=1)
    d12 = total_derivative(total_derivative(e, 1), 2)
    d21 = total_derivative(total_derivative(e, 2), 1)
    assert is_zero(d12 - d21) is Zero.ZERO


@given(polynomials(), polynomials())
def test_total_derivative_leibniz(a, b):
    lhs = total_derivative(a * b)
    rhs = total_derivative(a) * b + a * total_derivative(b)
    assert is_zero(lhs - rhs) is Zero.ZERO


@given(polynomials())
def test_total_derivative_matches_pullback(e):
    # D is differentiation along graphs: pullback(D e) = d/dx pullback(e)
    fs = [parse("x1^3 + 2*x1", n=1, m=2), parse("x1^2 - 1", n=1, m=2)]
    lhs = pullback(total_derivative(e), fs)
    rhs = pullback(e, fs).diff(x(1))
    assert is_zero(lhs - rhs) is Zero.ZERO


def test_prolong_set_examples():
    A = MultiPairSet(1, 1, [(1, (0,))])
    assert prolong_set(A, 1) == MultiPairSet(1, 1, [(1, (0,)), (1, (1,))])
    B = MultiPairSet(2, 1)
    want = [(1, (0, 0)), (1, (1, 0)), (1, (0, 1)), (1, (2, 0)), (1, (1, 1)), (1, (0, 2))]
    assert prolong_set(B, 2) == MultiPairSet(2, 1, want)
    C = MultiPairSet(1, 2, [(2, (3,))])
    assert prolong_set(C, 0) == C


def test_multipairset_adds_zero_pairs_and_validates():
    s = MultiPairSet(1, 2)
    assert (1, (0,)) in s and (2, (0,)) in s and len(s) == 2
    with pytest.raises(ValueError):
        MultiPairSet(1, 2, [(3, (0,))])


def test_multiindex_ops():
    a = MultiIndex((1, 0))
    assert a.plus(2) == (1, 1) and a.order == 1
    assert MultiIndex.unit(2, 1) + MultiIndex.unit(2, 2) == (1, 1)


def test_coordinate_list_order():
    names = [str(c) for c in coordinate_list(1, 2, 1)]
    assert names == ["x1", "u1[0]", "u2[0]", "u1[1]", "u2[1]"]
