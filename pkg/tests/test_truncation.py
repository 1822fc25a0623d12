import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lbflow.expo2 import structure_matrices
from lbflow.expr import Zero, is_zero, u, x
from lbflow.field import LBField, prolong
from lbflow.foliation import build_radial
from lbflow.jet import MultiPair, MultiIndex
from lbflow.truncation import (
    FiniteField,
    NonPolynomialError,
    PreconditionError,
    build_Xk,
    build_Yk,
    dependency_set,
    lie_bracket,
    split,
    truncate,
)

from .strategies import polynomials

SYM = LBField.from_strings(1, 2, ["0"], ["u1[2] - u2[2]", "u1[2] - u2[2]"])
RADIAL = build_radial("l^2/2", "0")


def y(L, k):
    return u(L, (k,))


def test_dependency_set_examples():
    assert dependency_set(LBField.from_strings(1, 1, ["1"], ["0"])) == dependency_set(
        LBField.from_strings(1, 1, ["0"], ["0"]))
    assert len(dependency_set(LBField.from_strings(1, 1, ["1"], ["0"]))) == 1
    B = dependency_set(RADIAL)
    assert (1, (1,)) in B and (2, (1,)) in B
    assert dependency_set(SYM).order == 2


def test_split_translation():
    f = LBField.from_strings(1, 1, ["1"], ["0"])
    s = split(prolong(f, 1), 1)
    assert s.nu == 0 and s.grade0[MultiPair(1, MultiIndex((1,)))] == 0


def test_split_hand_example():
    f = LBField.from_strings(1, 1, ["0"], ["u1[1]*u1[2]"])
    s = split(prolong(f, 2), 2)
    key = MultiPair(1, MultiIndex((1,)))
    assert s.grade0[key] == y(1, 2) ** 2
    assert s.monomials[0] == y(1, 3)
    assert s.coefficient(1, 1, (1,)) == y(1, 1)


def test_split_restricted_family_k1():
    s = split(prolong(RADIAL, 1), 1)
    assert [str(m) for m in s.monomials] == ["u1[2]", "u2[2]"]
    M = structure_matrices(RADIAL).M
    for L in (1, 2):
        for R in (1, 2):
            assert is_zero(s.coefficient(R, L, (1,)) - M[L - 1][R - 1]) is Zero.ZERO


def test_split_preconditions():
    with pytest.raises(PreconditionError):
        split(prolong(SYM, 3), 1)
    f = LBField.from_strings(1, 1, ["0"], ["1/(1 + u1[1]^2)"])
    with pytest.raises(NonPolynomialError):
        split(prolong(f, 3), 0, dependency_set(LBField.from_strings(1, 1, ["0"], ["0"])))


def test_xk_and_yk_restricted():
    X, Ys, s = truncate(RADIAL, 1)
    assert X.coefficient(x(1)) == 0
    assert X.coefficient(y(1, 0)) == RADIAL.eta0[0]
    assert len(Ys) == 2
    X2, Ys2, s2 = truncate(RADIAL, 2)
    assert X2.coefficient(y(1, 2)).jet_order() <= 2
    M = structure_matrices(RADIAL).M
    # Y^(2)_R = M^R_P d/dy2_P
    for R, Y in enumerate(Ys2[:2], start=1):
        for P in (1, 2):
            assert is_zero(Y.coefficient(y(P, 2)) - M[P - 1][R - 1]) is Zero.ZERO


def test_xk_translation():
    X, Ys, _ = truncate(LBField.from_strings(1, 1, ["1"], ["0"]), 1)
    assert [str(v) for v in X.coeffs.values()] == ["1", "0", "0"]
    assert Ys == []


@pytest.mark.parametrize("f", [SYM, RADIAL, LBField.from_strings(1, 1, ["u1[0]"], ["x1*u1[1]^2"])])
def test_recombination(f):
    B = dependency_set(f)
    for k in (B.order, B.order + 1):
        p = prolong(f, k)
        s = split(p, k, B)
        for key in s.grade0:
            assert is_zero(s.recombine(key) - p.eta[key]) is Zero.ZERO


def test_monomial_order_is_stable():
    a = [str(m) for m in split(prolong(SYM, 3), 3).monomials]
    b = [str(m) for m in split(prolong(SYM, 3), 3).monomials]
    assert a == b


def test_bracket_examples():
    dx = FiniteField(1, 1, 0, {x(1): 1})
    xdx = FiniteField(1, 1, 0, {x(1): x(1)})
    assert str(lie_bracket(dx, xdx)) == str(dx)
    assert lie_bracket(xdx, xdx).is_zero() is Zero.ZERO


def _small_field(draw):
    vs = [x(1), y(1, 0), y(1, 1)]
    return FiniteField(1, 1, 1, {v: draw(polynomials(m=1, order=1, max_terms=2)) for v in vs})


@settings(max_examples=15)
@given(st.data())
def test_bracket_antisymmetry_and_jacobi(data):
    a, b, c = (_small_field(data.draw) for _ in range(3))
    ab, ba = lie_bracket(a, b), lie_bracket(b, a)
    for v in a.coords:
        assert is_zero(ab.coeffs[v] + ba.coeffs[v]) is Zero.ZERO
    j1 = lie_bracket(a, lie_bracket(b, c))
    j2 = lie_bracket(b, lie_bracket(c, a))
    j3 = lie_bracket(c, lie_bracket(a, b))
    for v in a.coords:
        assert is_zero(j1.coeffs[v] + j2.coeffs[v] + j3.coeffs[v]) is Zero.ZERO
