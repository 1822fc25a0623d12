import pytest
from hypothesis import given, settings

from lbflow.expr import Zero, const, is_zero, parse, u
from lbflow.field import (
    LBField,
    SignatureError,
    commutator_defect,
    epsilon0,
    prolong,
    prolong_along,
    verify_lb_identity,
)
from lbflow.jet import MultiPair, MultiIndex, total_derivative

from .strategies import poly_fields

SYM = LBField.from_strings(1, 2, ["0"], ["u1[2] - u2[2]", "u1[2] - u2[2]"])


def y(L, k):
    return u(L, (k,))


def test_translation_prolongation():
    f = LBField.from_strings(1, 1, ["1"], ["0"])
    p = prolong(f, 3)
    assert p.eta_of(1, (1,)) == 0
    assert p.eps_of(1, (1,)) == -y(1, 2)
    assert epsilon0(f) == [-y(1, 1)]


def test_second_order_field_prolongation():
    f = LBField.from_strings(1, 1, ["0"], ["u1[2]"])
    p = prolong(f, 4)
    for k in range(5):
        assert p.eta_of(1, (k,)) == y(1, k + 2)
        assert p.eps_of(1, (k,)) == y(1, k + 2)


def test_symmetrized_prolongation():
    p = prolong(SYM, 4)
    for k in range(5):
        for L in (1, 2):
            assert p.eps_of(L, (k,)) == y(1, k + 2) - y(2, k + 2)
    assert verify_lb_identity(prolong(SYM, 3)).verdict == "pass"


def test_epsilon0_examples():
    f = LBField.from_strings(1, 1, ["0"], ["u1[1]"])
    assert epsilon0(f) == [y(1, 1)]
    g = LBField.from_strings(1, 2, ["u1[1]"], ["u2[1]", "0"])
    assert epsilon0(g)[0] == y(2, 1) - y(1, 1) * y(1, 1)


def test_injected_defect_is_localized():
    f = LBField.from_strings(1, 1, ["u1[0]"], ["x1*u1[1]"])
    p = prolong(f, 2)
    key = MultiPair(1, MultiIndex((1,)))
    p.eps[key] = p.eps[key] + 1
    e = verify_lb_identity(p)
    assert e.verdict == "fail"
    assert e.witness["L"] == 1 and e.witness["alpha"] == [0] and e.witness["i"] == 1


def test_commutator_examples():
    for f in (LBField.from_strings(1, 1, ["1"], ["0"]), LBField.from_strings(1, 1, ["0"], ["u1[1]"])):
        assert commutator_defect(f, prolong(f, 2)).verdict == "pass"


def test_path_independence_n2():
    f = LBField.from_strings(2, 1, ["x2*u1[0,0]", "u1[1,0]"], ["x1*u1[0,1]"])
    a = prolong_along(f, 1, [1, 2])
    b = prolong_along(f, 1, [2, 1])
    assert is_zero(a - b) is Zero.ZERO
    assert verify_lb_identity(prolong(f, 2)).verdict == "pass"
    assert commutator_defect(f, prolong(f, 2), 2).verdict == "pass"


def test_signature_checks():
    with pytest.raises(SignatureError):
        LBField(1, 2, [const(0)], [const(0)])
    with pytest.raises(SignatureError):
        LBField(1, 1, [u(2, (0,))], [const(0)])


@settings(max_examples=20)
@given(poly_fields())
def test_lb_identity_random_fields(f):
    p = prolong(f, 3)
    assert verify_lb_identity(p).verdict == "pass"
    for key in p.pairs():
        if key.order < 3:
            nxt = p.eps[MultiPair(key.L, key.alpha.plus(1))]
            assert is_zero(nxt - total_derivative(p.eps[key])) is Zero.ZERO


@settings(max_examples=15)
@given(poly_fields())
def test_commutator_random_fields(f):
    assert commutator_defect(f, prolong(f, 2)).verdict == "pass"
