"""Flows of LB fields: closed forms, lifting to higher jets, RK4 integration
of truncated fields, flow-law verification and the induced action on germs."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .expr import Expr, SingularityError, Zero, as_expr, atoms, const, is_zero, param, substitute, u, x
from .field import LBField, prolong
from .jet import MultiIndex, apply_vector_field, pullback, total_derivative
from .report import CheckEntry, verdict_from_zero
from .sampling import _range, rational_in
from .truncation import FiniteField

T = param("t")
S = param("s")


class FlowError(ValueError):
    pass


class RestrictionError(FlowError):
    pass


def _t_sub(e: Expr, value) -> Expr:
    return substitute(e, {T: value})


class FlowMap:
    """Components of a flow on J^inf(R, R^m) as expressions in t and jets.

    Symbolic flows store Xi and the H^k_L they were given and lift further
    components on demand with H^{k+1} = D H^k / D Xi.
    """

    def __init__(self, m: int, Xi, H0, field: LBField | None = None, note: str = "",
                 kind: str = "symbolic"):
        self.n = 1
        self.m = m
        self.kind = kind
        self.field = field
        self.Xi = as_expr(Xi)
        self.H = {(L, 0): as_expr(h) for L, h in enumerate(H0, start=1)}
        self.note = note
        self._dxi = None

    @property
    def DXi(self) -> Expr:
        if self._dxi is None:
            self._dxi = total_derivative(self.Xi)
        return self._dxi

    def set_component(self, L: int, k: int, e) -> None:
        self.H[(L, k)] = as_expr(e)

    def component(self, L: int, k: int) -> Expr:
        key = (L, k)
        if key not in self.H:
            self.H[key] = lift_component(self, key)
        return self.H[key]

    def coordinate(self, c: Expr) -> Expr:
        a = c.atom
        if a.kind == "x":
            return self.Xi
        if a.kind == "jet":
            return self.component(a.L, a.alpha[0])
        raise ValueError(f"{c} is not a coordinate")

    def coords(self, order: int) -> list:
        out = [x(1)]
        for k in range(order + 1):
            out += [u(L, (k,)) for L in range(1, self.m + 1)]
        return out

    def components(self, order: int) -> list:
        return [self.coordinate(c) for c in self.coords(order)]


def lift_component(flow: FlowMap, target) -> Expr:
    """H^{k}_L from H^{k-1}_L via D Xi * H^k = D H^{k-1} (n = 1)."""
    L, k = target
    if k < 1:
        raise FlowError("H^0 components are not lifted")
    if is_zero(flow.DXi) is Zero.ZERO:
        raise FlowError("D Xi vanishes identically; the flow is degenerate")
    return total_derivative(flow.component(L, k - 1)) / flow.DXi


# --------------------------------------------------------------------------
# constructions


def is_restricted(f: LBField) -> bool:
    allowed = {u(L, (1,)).atom.id for L in (1, 2)}
    return (f.n, f.m) == (1, 2) and all(e.free_ids <= allowed for e in f.components)


def h1_component(f: LBField, flow: FlowMap | None = None):
    """(H^1_1, H^1_2, denominator) from the closed quotient formula.

    The flow is singular where the denominator vanishes.
    """
    if not is_restricted(f):
        raise RestrictionError("h1 closed form needs xi, eta0 functions of y^1 only")
    y1 = [u(1, (1,)), u(2, (1,))]
    y2 = [u(1, (2,)), u(2, (2,))]
    den = 1 + T * sum((y2[q] * f.xi[0].diff(y1[q]) for q in range(2)), const(0))
    out = []
    for L in range(2):
        num = y1[L] + T * sum((y2[q] * f.eta0[L].diff(y1[q]) for q in range(2)), const(0))
        out.append(num / den)
    return out[0], out[1], den


def closed_form_flow(f: LBField) -> FlowMap:
    if not is_restricted(f):
        raise RestrictionError("closed form needs n=1, m=2 and xi, eta0 functions of y^1 only")
    Xi = x(1) + T * f.xi[0]
    H0 = [u(L, (0,)) + T * f.eta0[L - 1] for L in (1, 2)]
    h11, h12, den = h1_component(f)
    note = "" if den.is_const else f"singular where {den} = 0"
    flow = FlowMap(2, Xi, H0, f, note)
    flow.set_component(1, 1, h11)
    flow.set_component(2, 1, h12)
    return flow


def lie_series_flow(f: LBField, max_terms: int = 8) -> FlowMap:
    """Flow from the Lie series sum_j t^j/j! X^j(c), when it terminates for
    x and every y^0_L."""
    if f.n != 1:
        raise FlowError("symbolic flows are implemented for n = 1")
    p = prolong(f, max(f.order, 0) + 1)
    comps = p.vector_components()

    def X(g):
        nonlocal p, comps
        need = g.jet_order()
        if need > p.order:
            p = prolong(f, need)
            comps = p.vector_components()
        return apply_vector_field(g, {c: v for c, v in comps.items() if c.free_ids & g.free_ids})

    def series(c):
        total = c
        term = c
        for j in range(1, max_terms + 1):
            term = X(term)
            z = is_zero(term)
            if z is Zero.ZERO:
                return total
            total = total + term * T ** j / math.factorial(j)
        raise FlowError(f"Lie series for {c} did not terminate within {max_terms} terms")

    Xi = series(x(1))
    H0 = [series(u(L, (0,))) for L in range(1, f.m + 1)]
    return FlowMap(f.m, Xi, H0, f, "polynomial in t (terminating Lie series)")


# --------------------------------------------------------------------------
# numeric


def rk4_flow(xk: FiniteField, p, t: float, h: float = 1e-3, impl=None) -> np.ndarray:
    """Integrate z' = X^(k)(z) from p (values in ``xk.coords`` order or a
    coordinate -> value mapping) over time t."""
    if isinstance(p, dict):
        p = [float(p[c]) for c in xk.coords]
    p = [float(v) for v in p]
    if len(p) != len(xk.coords):
        raise ValueError(f"point needs {len(xk.coords)} coordinates")
    tape = kernels.compile_exprs([xk.coeffs[c] for c in xk.coords], xk.coords)
    return kernels.rk4(tape, p, t, h, impl)


class _NumericComponents:
    """Float evaluation of flow components through compiled tapes."""

    def __init__(self, flow: FlowMap, coords: list):
        self.coords = coords
        exprs = [flow.coordinate(c) for c in coords]
        vs = set()
        for e in exprs:
            vs |= {a for a in e.free_ids if a != T.atom.id}
        self.vars = sorted(vs, key=lambda a: atoms.get(a).key)
        self.tape = kernels.compile_exprs(exprs, self.vars + [T.atom.id])

    def __call__(self, values: dict, t: float) -> np.ndarray:
        row = [float(values[a]) for a in self.vars] + [float(t)]
        return kernels.eval_point(self.tape, row)


def verify_group_law(flow: FlowMap, samples: int = 100, t_max: float = 0.1, order: int = 1,
                     seed: int = 42, mode: str = "numeric", tol: float = 1e-9) -> CheckEntry:
    """max |Phi_t(Phi_s(p)) - Phi_{t+s}(p)| over components up to ``order``."""
    coords = flow.coords(order)
    outer = _NumericComponents(flow, coords)
    inner_coords = [atoms_to_var(a) for a in outer.vars]
    # symbolic composition of quotients grows quickly; auto keeps it to polynomials
    polynomial = all(flow.coordinate(c).rat.is_poly and flow.coordinate(c).is_rational for c in coords)
    if mode == "symbolic" or (mode == "auto" and polynomial):
        return _group_law_symbolic(flow, coords, inner_coords)
    inner = _NumericComponents(flow, inner_coords)
    rng = random.Random(seed)
    worst = 0.0
    good = resampled = 0
    while good < samples and resampled < 10 * samples:
        pt = {}
        for a in sorted(set(inner.vars) | set(outer.vars), key=lambda a: atoms.get(a).key):
            at = atoms.get(a)
            lo, hi = _range(at)
            pt[a] = float(rational_in(rng, lo, hi))
        t = float(rational_in(rng, -t_max, t_max))
        s = float(rational_in(rng, -t_max, t_max))
        try:
            mid = inner(pt, s)
            mid_vals = {a: v for a, v in zip(outer.vars, mid)}
            lhs = outer(mid_vals, t)
            rhs = outer(pt, t + s)
        except SingularityError:
            resampled += 1
            continue
        good += 1
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckEntry(
        name="group_law", verdict="pass" if good and worst < tol else "fail",
        residual=worst, mode="sampled",
        detail={"samples": good, "resampled": resampled, "order": order, "t_max": t_max},
    )


def atoms_to_var(aid: int) -> Expr:
    from .expr import var

    return var(atoms.get(aid))


def _group_law_symbolic(flow: FlowMap, coords, inner_coords) -> CheckEntry:
    bind_s = {c: _t_sub(flow.coordinate(c), S) for c in inner_coords}
    states = []
    failures = []
    for c in coords:
        F = flow.coordinate(c)
        lhs = substitute(F, bind_s)
        rhs = _t_sub(F, T + S)
        z = is_zero(lhs - rhs)
        states.append(z)
        if z is not Zero.ZERO:
            failures.append(str(c))
    v = verdict_from_zero(states)
    return CheckEntry(name="group_law", verdict=v, residual=len(failures),
                      witness=failures[0] if failures else None, mode="symbolic",
                      detail={"components": [str(c) for c in coords]})


def verify_eq2(flow: FlowMap, k: int) -> CheckEntry:
    """D Xi * H^{j+1}_L - D H^j_L must vanish for j < k."""
    states = []
    failures = []
    for L in range(1, flow.m + 1):
        for j in range(k):
            r = flow.DXi * flow.component(L, j + 1) - total_derivative(flow.component(L, j))
            z = is_zero(r)
            states.append(z)
            if z is not Zero.ZERO:
                failures.append({"L": L, "alpha": j, "residual": str(r), "status": z.value})
    return CheckEntry(name="eq2", verdict=verdict_from_zero(states), residual=len(failures),
                      witness=failures[0] if failures else None, mode="symbolic",
                      detail={"order": k, "failures": failures})


def identity_at_zero(flow: FlowMap, order: int) -> CheckEntry:
    states = [is_zero(_t_sub(flow.coordinate(c), 0) - c) for c in flow.coords(order)]
    return CheckEntry(name="identity_at_t0", verdict=verdict_from_zero(states), mode="symbolic")


def generator_check(flow: FlowMap, order: int) -> CheckEntry:
    """d/dt at t=0 of each component equals the field component."""
    f = flow.field
    p = prolong(f, order)
    states = [is_zero(_t_sub(flow.Xi.diff(T), 0) - f.xi[0])]
    for L in range(1, flow.m + 1):
        for k in range(order + 1):
            d = _t_sub(flow.component(L, k).diff(T), 0)
            states.append(is_zero(d - p.eta_of(L, (k,))))
    return CheckEntry(name="generator_at_t0", verdict=verdict_from_zero(states), mode="symbolic")


def starred_invariance(f: LBField, flow: FlowMap, samples: int = 100, seed: int = 42,
                       tol: float = 1e-9) -> CheckEntry:
    """eta0_L(H^1) - eta0_L(y^1) for restricted fields."""
    y1 = [u(1, (1,)), u(2, (1,))]
    bind = {y1[L]: flow.component(L + 1, 1) for L in range(2)}
    diffs = [substitute(e, bind) - e for e in f.eta0 + f.xi]
    return residual_entry("starred_invariance", diffs, samples, seed, tol)


def residual_entry(name, diffs, samples, seed, tol) -> CheckEntry:
    from .sampling import max_abs_residual

    states = [is_zero(d) for d in diffs]
    v = verdict_from_zero(states)
    if v != "unknown":
        return CheckEntry(name=name, verdict=v, residual=0.0 if v == "pass" else None, mode="symbolic")
    worst, used = max_abs_residual(diffs, samples, seed)
    return CheckEntry(name=name, verdict="pass" if used and worst < tol else "fail",
                      residual=worst, mode="sampled", detail={"samples": used})


# --------------------------------------------------------------------------
# germs


@dataclass
class GermFlowResult:
    t: float
    xs: np.ndarray
    f: np.ndarray
    ft: np.ndarray
    psi: np.ndarray
    invertible: bool
    covered: np.ndarray
    derivative_error: float
    notes: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["t", "x", "f1", "f2", "f1t", "f2t", "psi_t"])
        for i in range(len(self.xs)):
            row = [self.t, self.xs[i], self.f[i, 0], self.f[i, 1], self.ft[i, 0], self.ft[i, 1], self.psi[i]]
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _tape1(exprs):
    return kernels.compile_exprs(exprs, [x(1)])


def germ_flow(flow: FlowMap, fs, window, t: float, samples: int = 101, fd_h: float = 1e-5,
              fd_tol: float = 1e-6) -> GermFlowResult:
    """Sample f_t = H^0_t o tau f o Psi_t^{-1} on ``window``.

    Psi_t(x) = Xi_t(tau f(x)) is inverted by bisection on a monotone grid.
    """
    fs = [as_expr(e) for e in fs]
    if len(fs) != flow.m:
        raise ValueError(f"need {flow.m} component functions")
    a, b = map(float, window)
    tq = Fraction(t).limit_denominator(10 ** 12) if isinstance(t, float) else Fraction(t)
    psi_e = pullback(_t_sub(flow.Xi, tq), fs)
    h0_e = [pullback(_t_sub(flow.component(L, 0), tq), fs) for L in range(1, flow.m + 1)]
    h1_e = [pullback(_t_sub(flow.component(L, 1), tq), fs) for L in range(1, flow.m + 1)]
    psi_tape = _tape1([psi_e])
    h0_tape = _tape1(h0_e)
    h1_tape = _tape1(h1_e)
    f_tape = _tape1(fs)
    xs = np.linspace(a, b, samples)
    notes = []

    width = b - a
    grid = np.linspace(a - width - 1.0, b + width + 1.0, 8001)
    pg = kernels.eval_batch(psi_tape, grid[:, None])[:, 0]
    invertible = bool(np.all(np.diff(pg) > 0))
    if not invertible:
        notes.append("Psi_t is not monotone on the search grid")

    def psi(v):
        return float(kernels.eval_point(psi_tape, [v])[0])

    def invert(target):
        i = int(np.searchsorted(pg, target))
        if i == 0 or i >= len(grid):
            return None
        lo, hi = grid[i - 1], grid[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if psi(mid) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, abs(mid)):
                break
        return 0.5 * (lo + hi)

    fvals = kernels.eval_batch(f_tape, xs[:, None])
    psis = kernels.eval_batch(psi_tape, xs[:, None])[:, 0]
    ft = np.full((samples, flow.m), np.nan)
    covered = np.zeros(samples, dtype=bool)
    worst = 0.0
    if t == 0:
        # Phi_0 is the identity; skip the inversion round-off
        return GermFlowResult(0.0, xs, fvals, fvals.copy(), xs.copy(), True,
                              np.ones(samples, dtype=bool), 0.0, notes)
    if invertible:
        for i, xp in enumerate(xs):
            x0 = invert(xp)
            if x0 is None:
                continue
            covered[i] = True
            ft[i] = kernels.eval_point(h0_tape, [x0])
        # derivative of f_t against H^1 o tau f, through the chain rule
        for i, xp in enumerate(xs):
            if not covered[i]:
                continue
            xl, xr = invert(xp - fd_h), invert(xp + fd_h)
            if xl is None or xr is None:
                continue
            d = (kernels.eval_point(h0_tape, [xr]) - kernels.eval_point(h0_tape, [xl])) / (2 * fd_h)
            h1 = kernels.eval_point(h1_tape, [invert(xp)])
            err = np.abs(d - h1) / np.maximum(1.0, np.abs(h1))
            worst = max(worst, float(np.max(err)))
        if worst > fd_tol:
            notes.append(f"derivative cross-check error {worst:.3g} exceeds {fd_tol}")
    if not covered.all():
        notes.append(f"{int((~covered).sum())} window samples outside the image of Psi_t")
    return GermFlowResult(float(t), xs, fvals, ft, psis, invertible, covered, worst, notes)


def rk4_vs_closed(f: LBField, samples: int = 20, seed: int = 42, t_max: float = 0.5,
                  h: float = 1e-3, tol: float = 1e-6, impl=None) -> CheckEntry:
    """Integrate X^(1) with RK4 and compare with the closed-form Phi^(1)."""
    from .truncation import truncate

    xk, _, _ = truncate(f, 1)
    flow = closed_form_flow(f)
    closed = [flow.Xi, flow.component(1, 0), flow.component(2, 0)]
    closed = closed + [c for c in xk.coords[3:]]
    ctape = kernels.compile_exprs(closed, list(xk.coords) + [T])
    rng = random.Random(seed)
    worst = 0.0
    good = skipped = 0
    while good < samples and skipped < 10 * samples:
        p = [float(rational_in(rng, *_range(c.atom))) for c in xk.coords]
        t = float(rational_in(rng, -t_max, t_max))
        try:
            z = rk4_flow(xk, p, t, h, impl)
            ref = kernels.eval_point(ctape, p + [t])
        except SingularityError:
            skipped += 1
            continue
        if not np.all(np.isfinite(z)):
            skipped += 1
            continue
        good += 1
        worst = max(worst, float(np.max(np.abs(z - ref))))
    return CheckEntry(name="rk4_vs_closed", verdict="pass" if good and worst < tol else "fail",
                      residual=worst, mode="sampled",
                      detail={"samples": good, "skipped": skipped, "h": h, "t_max": t_max})
