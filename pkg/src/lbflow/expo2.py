"""Exponentiability checks for fields on J^inf(R, R^2) whose principal
components only involve x, y^0 and y^1.

Matrices are stored as nested lists indexed [L][Q]: row L is the component,
column Q the direction of differentiation.  So ``M[L][Q]`` is the entry
usually written with Q up and L down.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .expr import Expr, Zero, as_expr, const, evaluate_ids, is_zero, u, x
from .field import LBField
from .jet import apply_vector_field
from .report import CheckEntry, verdict_from_zero
from .sampling import max_abs_residual, sample_point, sample_points
from .truncation import FiniteField, build_Xk, build_Yk, dependency_set, lie_bracket, split


class UnsupportedSignature(ValueError):
    pass


class FactorError(ValueError):
    pass


def _y0(L):
    return u(L, (0,))


def _y1(L):
    return u(L, (1,))


def _y2(L):
    return u(L, (2,))


def check_supported(f: LBField):
    if (f.n, f.m) != (1, 2):
        raise UnsupportedSignature(f"need n=1, m=2, got n={f.n}, m={f.m}")
    if f.order > 1:
        raise UnsupportedSignature("principal components involve jets of order >= 2")


@dataclass
class StructureMatrices:
    O: list
    N: list
    M: list
    Q: list
    X1: FiniteField | None = None
    Y1: list = field(default_factory=list)

    def as_dict(self) -> dict:
        s = lambda mat: [[str(e) for e in row] for row in mat]
        return {"O": [str(e) for e in self.O], "N": s(self.N), "M": s(self.M), "Q": s(self.Q)}


def structure_matrices(f: LBField) -> StructureMatrices:
    check_supported(f)
    xi = f.xi[0]
    eta = f.eta0
    O = [eta[L].diff(x(1)) - _y1(L + 1) * xi.diff(x(1)) for L in range(2)]
    N = [[eta[L].diff(_y0(Q + 1)) - _y1(L + 1) * xi.diff(_y0(Q + 1)) for Q in range(2)]
         for L in range(2)]
    M = [[eta[L].diff(_y1(Q + 1)) - _y1(L + 1) * xi.diff(_y1(Q + 1)) for Q in range(2)]
         for L in range(2)]
    coeffs = {x(1): xi}
    for L in range(2):
        coeffs[_y0(L + 1)] = eta[L]
        coeffs[_y1(L + 1)] = O[L] + sum((_y1(Q + 1) * N[L][Q] for Q in range(2)), const(0))
    X1 = FiniteField(1, 2, 1, coeffs)
    Y1 = [FiniteField(1, 2, 1, {_y1(L + 1): M[L][R] for L in range(2)}) for R in range(2)]
    Q = [[None, None], [None, None]]
    for R in range(2):
        br = lie_bracket(X1, Y1[R])
        for L in range(2):
            Q[L][R] = br.coefficient(_y1(L + 1))
    return StructureMatrices(O, N, M, Q, X1, Y1)


def q_displayed(s: StructureMatrices) -> list:
    """Q from its expanded formula, for cross-checking the bracket route."""
    X1 = s.X1
    out = [[None, None], [None, None]]
    for Mi in range(2):
        for R in range(2):
            e = X1.apply(s.M[Mi][R])
            for Nn in range(2):
                e = e - s.M[Nn][R] * s.O[Mi].diff(_y1(Nn + 1))
                for Qq in range(2):
                    e = e - s.M[Nn][R] * _y1(Qq + 1) * s.N[Mi][Qq].diff(_y1(Nn + 1))
            for Qq in range(2):
                e = e - s.M[Qq][R] * s.N[Mi][Qq]
            out[Mi][R] = e
    return out


def matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(2)), const(0) if isinstance(A[0][0], Expr) else 0)
             for j in range(2)] for i in range(2)]


# --------------------------------------------------------------------------
# necessary contraction conditions


def contractions(f: LBField, s: StructureMatrices, which: str) -> list:
    """(label, expr) for sum_M K[M][R] d(target)/dy1_M, K = M or Q."""
    K = s.M if which == "i" else s.Q
    targets = [("xi", f.xi[0])] + [(f"eta0_{L + 1}", f.eta0[L]) for L in range(2)]
    out = []
    for R in range(2):
        for name, t in targets:
            e = sum((K[Mi][R] * t.diff(_y1(Mi + 1)) for Mi in range(2)), const(0))
            out.append((f"{which}:R={R + 1}:{name}", e))
    return out


def _residual_entry(name, items, samples, seed, tol, gating=True) -> CheckEntry:
    states = {label: is_zero(e, seed=seed) for label, e in items}
    worst, used = max_abs_residual([e for _, e in items], samples, seed)
    sym = verdict_from_zero(states.values())
    if sym == "unknown":
        verdict = "pass" if worst < tol and used > 0 else "fail"
        mode = "sampled"
    else:
        verdict, mode = sym, "symbolic"
    bad = [label for label, z in states.items() if z is not Zero.ZERO]
    witness = None
    if verdict == "fail":
        label = next(l for l, z in states.items() if z is Zero.NONZERO) if bad else None
        witness = {"entry": label, "expr": str(dict(items)[label])} if label else None
    return CheckEntry(
        name=name, verdict=verdict, residual=worst, witness=witness, mode=mode, gating=gating,
        detail={"samples": used, "undecided": [l for l in bad if states[l] is Zero.UNKNOWN]},
    )


def theorem6_conditions(f: LBField, s: StructureMatrices | None = None, samples=100, seed=42,
                        tol=1e-9) -> list:
    s = s or structure_matrices(f)
    return [
        _residual_entry("theorem6_i", contractions(f, s, "i"), samples, seed, tol),
        _residual_entry("theorem6_ii", contractions(f, s, "ii"), samples, seed, tol),
    ]


def _point_ids(point) -> dict:
    """Accept a 5-tuple (x, y0_1, y0_2, y1_1, y1_2) or an atom-id mapping."""
    if isinstance(point, dict):
        return {(k if isinstance(k, int) else k.atom.id): Fraction(v) for k, v in point.items()}
    coords = [x(1), _y0(1), _y0(2), _y1(1), _y1(2)]
    if len(point) != 5:
        raise ValueError("point must have 5 coordinates (x, y0_1, y0_2, y1_1, y1_2)")
    return {c.atom.id: Fraction(v) if not isinstance(v, float) else Fraction(v) for c, v in zip(coords, point)}


def _m_at(s: StructureMatrices, pt: dict):
    vals = {}
    for c in (x(1), _y0(1), _y0(2), _y1(1), _y1(2)):
        vals[c.atom.id] = pt.get(c.atom.id, 0)
    return [[evaluate_ids(e, vals) for e in row] for row in s.M]


def find_nonzero_point(s: StructureMatrices, seed=42, tries=200):
    rng = random.Random(seed)
    ids = [c.atom.id for c in (x(1), _y0(1), _y0(2), _y1(1), _y1(2))]
    for _ in range(tries):
        pt = sample_point(rng, ids)
        try:
            Mv = _m_at(s, pt)
        except ZeroDivisionError:
            continue
        if any(abs(float(v)) > 1e-9 for row in Mv for v in row):
            return pt
    return None


def nilpotency_check(s: StructureMatrices, point=None, seed=42, tol=1e-9) -> list:
    """M^2 = 0 (symbolic) and M != 0 at the point."""
    M2 = matmul(s.M, s.M)
    states = {f"({i + 1},{j + 1})": is_zero(M2[i][j], seed=seed) for i in range(2) for j in range(2)}
    v = verdict_from_zero(states.values())
    bad = [k for k, z in states.items() if z is Zero.NONZERO]
    sq = CheckEntry(
        name="m_squared_zero",
        verdict=v,
        residual=[[str(e) for e in row] for row in M2],
        witness={"entry": bad[0], "value": str(M2[int(bad[0][1]) - 1][int(bad[0][3]) - 1])} if bad else None,
        mode="symbolic" if v != "unknown" else "sampled",
    )
    if point is None:
        pt = find_nonzero_point(s, seed)
    else:
        pt = _point_ids(point)
    if pt is None:
        nz = CheckEntry(name="m_nonzero_at_point", verdict="unknown", residual=0.0,
                        mode="sampled", detail="no point with M != 0 found")
    else:
        try:
            Mv = _m_at(s, pt)
            mag = max(abs(float(v)) for row in Mv for v in row)
            nz = CheckEntry(
                name="m_nonzero_at_point",
                verdict="pass" if mag > tol else "unknown",
                residual=mag,
                witness={"point": _point_repr(pt), "M": [[_num(v) for v in row] for row in Mv]},
                mode="symbolic" if all(isinstance(v, Fraction) or isinstance(v, int) for row in Mv for v in row) else "sampled",
            )
        except ZeroDivisionError:
            nz = CheckEntry(name="m_nonzero_at_point", verdict="unknown", residual=None,
                            detail="M singular at the point")
    return [sq, nz]


def _num(v):
    if isinstance(v, (int, Fraction)):
        v = Fraction(v)
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


def _point_repr(pt: dict) -> list:
    coords = [x(1), _y0(1), _y0(2), _y1(1), _y1(2)]
    return [_num(pt.get(c.atom.id, 0)) for c in coords]


# --------------------------------------------------------------------------
# 2x2 factorization


def _scalar_zero(v) -> Zero:
    if isinstance(v, Expr):
        return is_zero(v)
    return Zero.ZERO if v == 0 else Zero.NONZERO


def _all_zero(mat, what):
    for row in mat:
        for v in row:
            z = _scalar_zero(v)
            if z is Zero.NONZERO:
                return False
            if z is Zero.UNKNOWN:
                raise FactorError(f"cannot decide {what}")
    return True


def factor_B(A, M):
    """B with A = B M, given M^2 = 0, M != 0 and A M = 0.

    The rows of A lie in the line spanned by the nonzero row of M, so B has a
    single nonzero column of ratios against that row.
    """
    exprs = any(isinstance(v, Expr) for row in list(A) + list(M) for v in row)
    if exprs:
        A = [[as_expr(v) for v in row] for row in A]
        M = [[as_expr(v) for v in row] for row in M]
        zero = const(0)
    else:
        A = [[Fraction(v) for v in row] for row in A]
        M = [[Fraction(v) for v in row] for row in M]
        zero = Fraction(0)
    if not _all_zero(matmul(M, M), "M^2 = 0"):
        raise FactorError("hypothesis M^2 = 0 fails")
    if _all_zero(M, "M != 0"):
        raise FactorError("hypothesis M != 0 fails")
    if not _all_zero(matmul(A, M), "A M = 0"):
        raise FactorError("hypothesis A M = 0 fails")
    for r in range(2):
        for j in range(2):
            if _scalar_zero(M[r][j]) is Zero.NONZERO:
                b = [A[i][j] / M[r][j] for i in range(2)]
                B = [[zero, zero], [zero, zero]]
                B[0][r], B[1][r] = b[0], b[1]
                return B
    raise FactorError("no usable nonzero entry in M")


def factor_residual(A, B, M):
    BM = matmul(B, M)
    return [[A[i][j] - BM[i][j] for j in range(2)] for i in range(2)]


# --------------------------------------------------------------------------
# module closure at k = 2


@dataclass
class ClosureResult:
    entry: CheckEntry
    A: list | None


def module_closure(f: LBField, samples: int = 20, seed: int = 42) -> ClosureResult:
    """Check that [X^(2), Y^(2)_l] lies in the span of the Y^(2).

    The x, y0 and y1 blocks of every bracket must vanish and the y2 block must
    factor through the matrix of Y^(2) coefficients.
    """
    from .field import prolong

    check_supported(f)
    deps = dependency_set(f)
    p = prolong(f, 2)
    s = split(p, 2, deps)
    X2 = build_Xk(p, s)
    Ys = build_Yk(s)
    detail = {"nu": len(Ys), "monomials": [str(mn) for mn in s.monomials]}
    if not Ys:
        return ClosureResult(CheckEntry("module_closure", "pass", residual=0, mode="symbolic",
                                        detail=dict(detail, note="no Y fields; closure is vacuous")), [])
    low = [x(1), _y0(1), _y0(2), _y1(1), _y1(2)]
    high = [_y2(1), _y2(2)]
    brackets = [lie_bracket(X2, Y) for Y in Ys]
    states = []
    for b in brackets:
        for c in low:
            states.append(is_zero(b.coefficient(c), seed=seed))
    low_verdict = verdict_from_zero(states)
    if low_verdict != "pass":
        return ClosureResult(CheckEntry("module_closure", low_verdict, residual=None,
                                        mode="symbolic", witness="x/y0/y1 block of a bracket is nonzero",
                                        detail=detail), None)
    C = [[b.coefficient(c) for c in high] for b in brackets]
    Ymat = [[Y.coefficient(c) for c in high] for Y in Ys]
    if len(Ys) == 2:
        try:
            A = factor_B(C, Ymat)
            res = factor_residual(C, A, Ymat)
            sym = verdict_from_zero(is_zero(e, seed=seed) for row in res for e in row)
        except FactorError as exc:
            A, sym = None, "fail"
            detail["symbolic_error"] = str(exc)
    else:
        A, sym = _direct_factor(C, Ymat, seed)
    checked, bad = _closure_at_points(C, Ymat, samples, seed)
    detail.update({"rational_points": checked, "point_failures": bad})
    verdict = sym
    if sym == "pass" and bad:
        verdict = "fail"
    if sym == "unknown" and checked and not bad:
        verdict = "pass"
    entry = CheckEntry(
        "module_closure", verdict, residual=bad, mode="symbolic" if sym != "unknown" else "sampled",
        witness=None if verdict == "pass" else "bracket y2 block does not factor through Y",
        detail=dict(detail, A=[[str(e) for e in row] for row in A] if A else None),
    )
    return ClosureResult(entry, A)


def _direct_factor(C, Ymat, seed):
    """Fewer than two Y fields: each bracket row must be a multiple of the Y row."""
    rows = []
    states = []
    for crow in C:
        coeffs = []
        for yrow in Ymat:
            j = next((j for j in range(len(yrow)) if is_zero(yrow[j], seed=seed) is Zero.NONZERO), None)
            coeffs.append(crow[j] / yrow[j] if j is not None else const(0))
        recon = [sum((coeffs[n] * Ymat[n][p] for n in range(len(Ymat))), const(0)) for p in range(len(crow))]
        states += [is_zero(crow[p] - recon[p], seed=seed) for p in range(len(crow))]
        rows.append(coeffs)
    return rows, verdict_from_zero(states)


def _closure_at_points(C, Ymat, samples, seed):
    """Factor exactly at rational points; returns (points checked, failures)."""
    flat = [e for row in C for e in row] + [e for row in Ymat for e in row]
    if not all(e.is_rational for e in flat):
        return 0, 0
    checked = bad = 0
    nY = len(Ymat)
    for pt, vals in sample_points(flat, samples, seed + 1):
        Cv = [vals[i * 2:(i + 1) * 2] for i in range(len(C))]
        Yv = [vals[2 * len(C) + i * 2: 2 * len(C) + (i + 1) * 2] for i in range(nY)]
        if all(v == 0 for row in Yv for v in row):
            continue
        checked += 1
        if nY == 2:
            try:
                B = factor_B(Cv, Yv)
            except FactorError:
                bad += 1
                continue
            if any(v != 0 for row in factor_residual(Cv, B, Yv) for v in row):
                bad += 1
        else:
            y = Yv[0]
            j = 0 if y[0] != 0 else 1
            for crow in Cv:
                a = crow[j] / y[j]
                if any(crow[p] - a * y[p] != 0 for p in range(2)):
                    bad += 1
                    break
    return checked, bad


# --------------------------------------------------------------------------
# aggregate


@dataclass
class ExpoReport:
    matrices: StructureMatrices | None
    entries: list
    verdict: str  # exponentiable-at-point | rejected | inconclusive
    A: list | None = None

    @property
    def exit_verdict(self) -> str:
        return {"exponentiable-at-point": "pass", "rejected": "fail"}.get(self.verdict, "unknown")


def expo_check(f: LBField, point=None, samples=100, seed=42, tol=1e-9, closure=True) -> ExpoReport:
    s = structure_matrices(f)
    entries = theorem6_conditions(f, s, samples, seed, tol)
    entries += nilpotency_check(s, point, seed, tol)
    by = {e.name: e for e in entries}
    rejected = any(by[k].verdict == "fail" for k in ("theorem6_i", "theorem6_ii", "m_squared_zero"))
    A = None
    if rejected:
        entries.append(CheckEntry("module_closure", "skipped", detail="conditions already fail"))
        verdict = "rejected"
    else:
        ok = all(by[k].verdict == "pass" for k in by)
        if closure:
            cr = module_closure(f, samples=min(samples, 20), seed=seed)
            entries.append(cr.entry)
            A = cr.A
            ok = ok and cr.entry.verdict == "pass"
        verdict = "exponentiable-at-point" if ok else "inconclusive"
    return ExpoReport(s, entries, verdict, A)
