import math
from fractions import Fraction

import numpy as np
import pytest

from lbflow.expr import Zero, evaluate, is_zero, param, parse, substitute, u, x
from lbflow.field import LBField
from lbflow.flow import (
    FlowError,
    FlowMap,
    RestrictionError,
    T,
    closed_form_flow,
    generator_check,
    germ_flow,
    h1_component,
    identity_at_zero,
    lie_series_flow,
    lift_component,
    rk4_flow,
    rk4_vs_closed,
    starred_invariance,
    verify_eq2,
    verify_group_law,
)
from lbflow.foliation import build_affine, build_radial
from lbflow.truncation import truncate

RADIAL = build_radial("l^2/2", "0")
TRANS = LBField.from_strings(1, 2, ["1"], ["0", "0"])
SYM = LBField.from_strings(1, 2, ["0"], ["1/2*u1[2] - 1/2*u2[2]", "1/2*u1[2] - 1/2*u2[2]"])


def y(L, k):
    return u(L, (k,))


def test_closed_form_radial():
    fl = closed_form_flow(RADIAL)
    assert fl.Xi == x(1)
    assert is_zero(fl.component(1, 0) - (y(1, 0) + T * y(2, 1) / y(1, 1))) is Zero.ZERO
    assert is_zero(fl.component(2, 0) - (y(2, 0) + T * (y(2, 1) / y(1, 1)) ** 2 / 2)) is Zero.ZERO


def test_closed_form_translation():
    fl = closed_form_flow(TRANS)
    assert fl.Xi == x(1) + T
    for k in range(4):
        assert fl.component(1, k) == y(1, k)


def test_closed_form_restriction():
    with pytest.raises(RestrictionError):
        closed_form_flow(SYM)


def test_h1_radial_point():
    h11, h12, den = h1_component(RADIAL)
    assert den == 1
    a, b = Fraction(3, 7), Fraction(-2, 5)
    env = {y(1, 1): 1, y(2, 1): 2, y(1, 2): a, y(2, 2): b, T: Fraction(1, 3)}
    t = Fraction(1, 3)
    assert evaluate(h11, env) == 1 + t * (-2 * a + b)
    assert evaluate(h12, env) == 2 + t * (-4 * a + 2 * b)


def test_h1_matches_lift():
    for f in (RADIAL, build_affine(1, "l^2/2", "l"), build_radial("l^3", "l")):
        fl = closed_form_flow(f)
        for L in (1, 2):
            lifted = lift_component(fl, (L, 1))
            assert is_zero(lifted - fl.component(L, 1)) is Zero.ZERO


def test_radial_second_order_at_t0():
    fl = closed_form_flow(RADIAL)
    for L in (1, 2):
        assert substitute(fl.component(L, 2), {T: 0}) == y(L, 2)


def test_lie_series_symmetrized():
    fl = lie_series_flow(SYM)
    assert fl.Xi == x(1)
    for k in range(6):
        for L in (1, 2):
            want = y(L, k) + T / 2 * (y(1, k + 2) - y(2, k + 2))
            assert is_zero(fl.component(L, k) - want) is Zero.ZERO
    assert verify_group_law(fl, order=3, mode="symbolic").verdict == "pass"
    assert verify_eq2(fl, 3).verdict == "pass"


def test_lie_series_nonterminating():
    with pytest.raises(FlowError):
        lie_series_flow(LBField.from_strings(1, 1, ["0"], ["u1[1]^2"]), max_terms=3)


def test_degenerate_flow():
    fl = FlowMap(1, 0, [y(1, 0)])
    with pytest.raises(FlowError):
        fl.component(1, 1)


@pytest.mark.parametrize("f", [RADIAL, TRANS, build_affine(1, "l^2/2", "l"), build_radial("l^2/2", "l")])
def test_flow_invariants(f):
    fl = closed_form_flow(f)
    assert identity_at_zero(fl, 2).verdict == "pass"
    assert generator_check(fl, 2).verdict == "pass"
    assert verify_eq2(fl, 2).verdict == "pass"
    assert starred_invariance(f, fl).verdict == "pass"
    gl = verify_group_law(fl, samples=100, order=1)
    assert gl.verdict == "pass" and gl.residual < 1e-9


def test_eq2_detects_injected_defect():
    fl = closed_form_flow(RADIAL)
    fl.set_component(1, 1, fl.component(1, 1) + T ** 2)
    e = verify_eq2(fl, 1)
    assert e.verdict == "fail"
    assert e.witness["L"] == 1 and e.witness["alpha"] == 0


def test_group_law_t0_exact():
    fl = closed_form_flow(RADIAL)
    for c in fl.coords(1):
        F = fl.coordinate(c)
        s = param("s")
        inner = {v: substitute(fl.coordinate(v), {T: s}) for v in fl.coords(2) if v.free_ids & F.free_ids}
        lhs = substitute(substitute(F, {T: 0}), inner)
        assert is_zero(lhs - substitute(F, {T: s})) is Zero.ZERO


def test_rk4_examples():
    X, _, _ = truncate(RADIAL, 1)
    z = rk4_flow(X, [0, 0, 0, 1, 2], 0.5, 1e-3)
    assert np.max(np.abs(z - np.array([0, 1, 1, 1, 2]))) < 1e-9
    Xt, _, _ = truncate(LBField.from_strings(1, 1, ["1"], ["0"]), 1)
    assert rk4_flow(Xt, [0, 0, 0], 1.0, 1e-3)[0] == pytest.approx(1.0, abs=1e-12)


def test_rk4_vs_closed():
    for f in (RADIAL, build_affine(1, "l^2/2", "l")):
        e = rk4_vs_closed(f, samples=20)
        assert e.verdict == "pass" and e.residual < 1e-6


def test_germ_translation():
    fl = lie_series_flow(TRANS)
    fs = [parse("sin(x1)", n=1, m=2), parse("x1^2", n=1, m=2)]
    r = germ_flow(fl, fs, (-1, 2), 0.5, samples=41)
    assert r.invertible and r.covered.all()
    assert np.allclose(r.psi, r.xs + 0.5, atol=1e-12)
    assert np.max(np.abs(r.ft[:, 0] - np.sin(r.xs - 0.5))) < 1e-8
    assert np.max(np.abs(r.ft[:, 1] - (r.xs - 0.5) ** 2)) < 1e-8


def test_germ_symmetrized():
    fl = lie_series_flow(SYM)
    fs = [parse("sin(x1)", n=1, m=2), parse("0", n=1, m=2)]
    r = germ_flow(fl, fs, (0, 3), 0.2, samples=31)
    assert np.allclose(r.psi, r.xs, atol=1e-14)
    assert np.max(np.abs(r.ft[:, 0] - 0.9 * np.sin(r.xs))) < 1e-8
    assert np.max(np.abs(r.ft[:, 1] + 0.1 * np.sin(r.xs))) < 1e-8
    assert r.derivative_error < 1e-6


def test_germ_t0_identity():
    fl = closed_form_flow(build_radial("l^2/2", "l"))
    fs = [parse("x1^2 + 1", n=1, m=2), parse("x1^3 + 2*x1", n=1, m=2)]
    r = germ_flow(fl, fs, (0.5, 1.5), 0, samples=11)
    assert np.array_equal(r.ft, r.f)
    assert np.array_equal(r.psi, r.xs)


def test_germ_noninvertible_is_flagged():
    fl = FlowMap(1, x(1) + T * y(1, 1) ** 2, [y(1, 0)])
    r = germ_flow(fl, [parse("-3*x1^2", n=1, m=1)], (-1, 1), 1.0, samples=11)
    assert not r.invertible and r.notes


def test_csv_columns():
    fl = lie_series_flow(TRANS)
    r = germ_flow(fl, [parse("x1", n=1, m=2), parse("1", n=1, m=2)], (0, 1), 0.25, samples=3)
    lines = r.to_csv().splitlines()
    assert lines[0] == "t,x,f1,f2,f1t,f2t,psi_t"
    assert lines[1].split(",")[:2] == ["0.25", "0.0"] and len(lines) == 4
