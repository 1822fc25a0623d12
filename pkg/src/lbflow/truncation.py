"""Finite truncations X^(k), Y^(k)_l of a prolonged LB field."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, Zero, as_expr, atoms, const, is_zero, var, x
from .expr.poly import ONE, Rat, mono_div, r_make
from .expr.tree import from_rat
from .field import LBField, ProlongedField
from .jet import MultiIndex, MultiPair, MultiPairSet, apply_vector_field, coordinate_list


class PreconditionError(ValueError):
    pass


class NonPolynomialError(ValueError):
    pass


def dependency_set(f: LBField, **zero_kw) -> MultiPairSet:
    """Multipairs (M, beta) on which some principal component depends.

    An undecided zero test counts as a dependency.
    """
    pairs = set()
    for e in f.components:
        for a in e.free_atoms():
            if a.kind != "jet":
                continue
            if is_zero(e.diff(a), **zero_kw) is not Zero.ZERO:
                pairs.add((a.L, MultiIndex(a.alpha)))
    return MultiPairSet(f.n, f.m, pairs)


def _jet_key(a):
    return (a.order, a.L, tuple(-v for v in a.alpha))


@dataclass
class PolynomialSplit:
    k: int
    n: int
    m: int
    grade0: dict = field(default_factory=dict)
    coeffs: dict = field(default_factory=dict)  # pair -> {l: Expr}
    monomials: list = field(default_factory=list)
    high_vars: list = field(default_factory=list)

    @property
    def nu(self) -> int:
        return len(self.monomials)

    def recombine(self, pair) -> Expr:
        pair = MultiPair(pair[0], MultiIndex(pair[1]))
        out = self.grade0[pair]
        for ell, c in self.coeffs.get(pair, {}).items():
            out = out + c * self.monomials[ell - 1]
        return out

    def coefficient(self, ell: int, L: int, alpha) -> Expr:
        return self.coeffs.get(MultiPair(L, MultiIndex(alpha)), {}).get(ell, const(0))


def _high_part(rat: Rat, high: set, where: str):
    """Group numerator monomials by their part in the high atoms."""
    for f, _ in rat.den:
        if f.atoms & high:
            raise NonPolynomialError(f"{where}: denominator depends on high-order jets")
    for aid in rat.atoms():
        a = atoms.get(aid)
        if a.kind == "func" and a.free & high:
            raise NonPolynomialError(f"{where}: {a.text} depends on high-order jets")
    groups: dict = {}
    for mono, c in rat.num.items():
        hm = tuple((aid, e) for aid, e in mono if aid in high)
        rest = mono_div(mono, hm)
        groups.setdefault(hm, {})[rest] = c
    return groups


def split(p: ProlongedField, k: int, deps: MultiPairSet | None = None) -> PolynomialSplit:
    f = p.field
    if deps is None:
        deps = dependency_set(f)
    if k < deps.order:
        raise PreconditionError(f"k={k} is below the dependency order {deps.order}")
    if p.order < k:
        raise PreconditionError(f"prolonged order {p.order} is below k={k}")
    entries = [key for key in p.pairs() if key.order <= k]
    high = set()
    for key in entries:
        for a in p.eta[key].free_atoms():
            if a.kind == "jet" and a.order > k:
                high.add(a.id)
    grouped = {}
    for key in entries:
        grouped[key] = _high_part(p.eta[key].rat, high, f"eta{key}")
    high_vars = sorted((atoms.get(a) for a in high), key=_jet_key)
    index = {a.id: i for i, a in enumerate(high_vars)}

    def expvec(hm):
        v = [0] * len(high_vars)
        for aid, e in hm:
            v[index[aid]] = e
        return tuple(v)

    monos = set()
    for g in grouped.values():
        monos.update(hm for hm in g if hm)
    ordered = sorted(monos, key=lambda hm: (sum(e for _, e in hm), tuple(-v for v in expvec(hm))))
    ell_of = {hm: i + 1 for i, hm in enumerate(ordered)}

    s = PolynomialSplit(k=k, n=f.n, m=f.m, high_vars=[var(a) for a in high_vars])
    s.monomials = [from_rat(Rat({hm: 1})) for hm in ordered]
    for key in entries:
        den = dict(p.eta[key].rat.den)
        g = grouped[key]
        s.grade0[key] = from_rat(r_make(g.get(ONE, {}), den)) if ONE in g else const(0)
        cs = {}
        for hm, poly in g.items():
            if hm:
                cs[ell_of[hm]] = from_rat(r_make(poly, den))
        s.coeffs[key] = dict(sorted(cs.items()))
    return s


class FiniteField:
    """Vector field on J^k with coefficients in J^k."""

    def __init__(self, n: int, m: int, k: int, coeffs: dict, check: bool = True):
        self.n, self.m, self.k = n, m, k
        coords = coordinate_list(n, m, k)
        self.coords = coords
        known = set(coords)
        out = {}
        for c, v in coeffs.items():
            if c not in known:
                raise ValueError(f"{c} is not a coordinate of J^{k}")
            v = as_expr(v)
            if check and v.jet_order() > k:
                raise ValueError(f"coefficient {v} leaves J^{k}")
            out[c] = v
        self.coeffs = {c: out.get(c, const(0)) for c in coords}

    def coefficient(self, c) -> Expr:
        return self.coeffs.get(c, const(0))

    def apply(self, g) -> Expr:
        return apply_vector_field(g, {c: v for c, v in self.coeffs.items() if v})

    def is_zero(self, **zero_kw) -> Zero:
        states = [is_zero(v, **zero_kw) for v in self.coeffs.values()]
        if any(s is Zero.NONZERO for s in states):
            return Zero.NONZERO
        if all(s is Zero.ZERO for s in states):
            return Zero.ZERO
        return Zero.UNKNOWN

    def nonzero(self) -> dict:
        return {c: v for c, v in self.coeffs.items() if v}

    def __str__(self) -> str:
        parts = [f"({v})*d/d{c}" for c, v in self.coeffs.items() if v]
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FiniteField[{self}]"


def lie_bracket(a: FiniteField, b: FiniteField) -> FiniteField:
    if (a.n, a.m, a.k) != (b.n, b.m, b.k):
        raise ValueError("bracket of fields on different jet spaces")
    coeffs = {}
    for c in a.coords:
        coeffs[c] = a.apply(b.coeffs[c]) - b.apply(a.coeffs[c])
    return FiniteField(a.n, a.m, a.k, coeffs)


def build_Xk(p: ProlongedField, s: PolynomialSplit) -> FiniteField:
    f = p.field
    coeffs = {x(i): f.xi[i - 1] for i in range(1, f.n + 1)}
    for key, g0 in s.grade0.items():
        coeffs[key.coord()] = g0
    return FiniteField(f.n, f.m, s.k, coeffs)


def build_Yk(s: PolynomialSplit) -> list:
    out = []
    for ell in range(1, s.nu + 1):
        coeffs = {}
        for key, cs in s.coeffs.items():
            if ell in cs:
                coeffs[key.coord()] = cs[ell]
        out.append(FiniteField(s.n, s.m, s.k, coeffs))
    return out


def truncate(f: LBField, k: int | None = None):
    """Convenience: prolong, split and build (X^(k), [Y^(k)_l], split)."""
    from .field import prolong

    deps = dependency_set(f)
    if k is None:
        k = deps.order
    p = prolong(f, k)
    s = split(p, k, deps)
    return build_Xk(p, s), build_Yk(s), s
