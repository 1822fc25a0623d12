"""Exponentiable LB fields on J(R, R^2) from line foliations of the y^1 plane.

The leaves are lines y1_2 = m(l) y1_1 + q0(l) indexed by a leaf coordinate
l(y1_1, y1_2).  A field with xi = g(l), eta0_1 = f1(l), eta0_2 = f2(l) is
built from f2' - m f1' = q0 g'.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import Expr, Zero, as_expr, const, is_zero, ln, param, parse, substitute, u
from .expr.poly import Rat
from .field import LBField
from .report import CheckEntry, verdict_from_zero

LAM = param("l")
Y11 = u(1, (1,))
Y12 = u(2, (1,))


class FoliationError(ValueError):
    pass


class LeafTangencyError(FoliationError):
    pass


class QuadratureError(FoliationError):
    """The integrand has no antiderivative we produce symbolically."""


def parse_l(text) -> Expr:
    """Parse a function of the leaf indeterminate ``l``."""
    if isinstance(text, Expr):
        return text
    e = parse(str(text), params=("l",))
    bad = [a.text for a in e.free_atoms() if a.kind != "param" and a.kind != "func"]
    if bad or any(a.kind == "param" and a.name != "l" for a in e.free_atoms()):
        raise FoliationError(f"expected a function of l only, got {text!r}")
    return e


def dl(e: Expr) -> Expr:
    return e.diff(LAM)


def at_leaf(e: Expr, lam: Expr) -> Expr:
    return substitute(e, {LAM: lam})


@dataclass
class FoliationSpec:
    family: str
    lam: Expr
    m: Expr
    q0: Expr
    F1: Expr
    g: Expr
    gamma: Fraction | None = None

    def tangency_residual(self) -> Expr:
        """grad l . (1, m(l)) on the y^1 plane."""
        mm = at_leaf(self.m, self.lam)
        return self.lam.diff(Y11) + mm * self.lam.diff(Y12)

    def q0_residual(self) -> Expr:
        """q0(l) - (y1_2 - m(l) y1_1), zero when the leaves are the stated lines."""
        return at_leaf(self.q0, self.lam) - (Y12 - at_leaf(self.m, self.lam) * Y11)

    def check(self) -> None:
        r = self.tangency_residual()
        if is_zero(r) is not Zero.ZERO:
            raise LeafTangencyError(f"leaf coordinate is not constant along direction (1, m): residual {r}")
        r = self.q0_residual()
        if is_zero(r) is not Zero.ZERO:
            raise LeafTangencyError(f"q0 does not match the leaves: residual {r}")


def radial_spec(F1, g) -> FoliationSpec:
    z = Y12 / Y11
    return FoliationSpec("radial", z, LAM, const(0), parse_l(F1), parse_l(g))


def affine_spec(gamma, F1, g) -> FoliationSpec:
    gamma = Fraction(gamma)
    lam = Y12 / (1 + gamma * Y11)
    return FoliationSpec("affine", lam, gamma * LAM, LAM, parse_l(F1), parse_l(g), gamma)


# --------------------------------------------------------------------------
# quadrature


def integrate_l(e: Expr) -> Expr:
    """Antiderivative in l of a Laurent polynomial in l (ln l for l^-1)."""
    e = as_expr(e)
    r: Rat = e.rat
    lid = LAM.atom.id
    if r.func_atoms() or any(a != lid for a in r.free()):
        raise QuadratureError(f"cannot integrate {e} symbolically in l")
    shift = 0
    for f, k in r.den:
        if f.atom_id != lid:
            raise QuadratureError(f"cannot integrate {e}: denominator factor {f.poly} is not a power of l")
        shift += k
    out = const(0)
    for mono, c in r.num.items():
        deg = dict(mono).get(lid, 0) - shift
        if deg == -1:
            out = out + c * ln(LAM)
        else:
            out = out + Fraction(c) / (deg + 1) * LAM ** (deg + 1)
    return out


def ode_residual(spec: FoliationSpec, f1: Expr, f2: Expr) -> Expr:
    """f2' - m f1' - q0 g' in l."""
    return dl(f2) - spec.m * dl(f1) - spec.q0 * dl(spec.g)


def _field(spec: FoliationSpec, f1: Expr, f2: Expr, name: str) -> LBField:
    comps = [at_leaf(e, spec.lam) for e in (spec.g, f1, f2)]
    return LBField(1, 2, [comps[0]], comps[1:], name=name)


def profile_general(spec: FoliationSpec):
    """(f1, f2) as functions of l from the foliation ODE."""
    spec.check()
    f1 = dl(spec.F1)
    f2 = integrate_l(spec.m * dl(f1) + spec.q0 * dl(spec.g))
    return f1, f2


def build_general(spec: FoliationSpec, name: str | None = None) -> LBField:
    f1, f2 = profile_general(spec)
    return _field(spec, f1, f2, name or f"{spec.family} foliation")


def build_radial(F1, g, name: str | None = None) -> LBField:
    """z = y1_2/y1_1; eta0_1 = F1'(z), eta0_2 = z F1'(z) - F1(z), xi = g(z)."""
    spec = radial_spec(F1, g)
    f1 = dl(spec.F1)
    f2 = LAM * f1 - spec.F1
    return _field(spec, f1, f2, name or "radial")


def affine_profile(gamma, F1, g, unintegrated: bool = False):
    """(spec, f1, f2) for the affine family.

    f2 = gamma l F1' - gamma F1 + G with G' = l g'.  ``unintegrated=True`` gives
    the variant with g in place of G, which does not satisfy the ODE unless
    (1 - l) g' = 0.
    """
    spec = affine_spec(gamma, F1, g)
    gm = spec.gamma
    f1 = dl(spec.F1)
    extra = spec.g if unintegrated else integrate_l(LAM * dl(spec.g))
    f2 = gm * LAM * f1 - gm * spec.F1 + extra
    return spec, f1, f2


def build_affine(gamma, F1, g, unintegrated: bool = False, name: str | None = None) -> LBField:
    spec, f1, f2 = affine_profile(gamma, F1, g, unintegrated)
    return _field(spec, f1, f2, name or ("affine (unintegrated g)" if unintegrated else "affine"))


def ode_entry(spec: FoliationSpec, f1: Expr, f2: Expr, name: str = "foliation_ode") -> CheckEntry:
    r = ode_residual(spec, f1, f2)
    z = is_zero(r)
    return CheckEntry(name=name, verdict=verdict_from_zero([z]), residual=0 if z is Zero.ZERO else None,
                      witness=None if z is Zero.ZERO else str(r), mode="symbolic")


def leaf_invariance(spec: FoliationSpec, flow, samples: int = 100, seed: int = 42,
                    tol: float = 1e-9) -> CheckEntry:
    """l(H^1_1, H^1_2) - l(y1_1, y1_2) along a flow."""
    from .flow import residual_entry

    moved = substitute(spec.lam, {Y11: flow.component(1, 1), Y12: flow.component(2, 1)})
    return residual_entry("leaf_invariance", [moved - spec.lam], samples, seed, tol)
