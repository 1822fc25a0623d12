"""Multiindices, multipairs and total derivatives on jet space."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, NamedTuple

from .expr import Expr, as_expr, atoms, substitute, u, var, x
from .expr.poly import UNIT, r_atom, r_derive
from .expr.tree import from_rat


class MultiIndex(tuple):
    """Tuple of non-negative ints with componentwise addition."""

    def __new__(cls, values):
        if isinstance(values, int):
            values = (values,)
        vals = tuple(int(v) for v in values)
        if any(v < 0 for v in vals):
            raise ValueError(f"negative multiindex entry in {vals}")
        return super().__new__(cls, vals)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> "MultiIndex":
        if not 1 <= i <= n:
            raise ValueError(f"direction {i} outside 1..{n}")
        return cls(tuple(1 if j == i - 1 else 0 for j in range(n)))

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def n(self) -> int:
        return len(self)

    def __add__(self, other):
        other = MultiIndex(other)
        if len(other) != len(self):
            raise ValueError("multiindex length mismatch")
        return MultiIndex(a + b for a, b in zip(self, other))

    def plus(self, i: int) -> "MultiIndex":
        return self + MultiIndex.unit(len(self), i)

    def minus(self, i: int):
        """alpha - e_i, or None when that component is zero."""
        if self[i - 1] == 0:
            return None
        return MultiIndex(v - (1 if j == i - 1 else 0) for j, v in enumerate(self))

    def __repr__(self) -> str:
        return f"MultiIndex{tuple(self)}"


class MultiPair(NamedTuple):
    L: int
    alpha: MultiIndex

    @property
    def order(self) -> int:
        return sum(self.alpha)

    def sortkey(self):
        return (self.order, self.L, tuple(-a for a in self.alpha))

    def coord(self) -> Expr:
        return u(self.L, self.alpha)

    def __str__(self) -> str:
        return f"({self.L},{','.join(map(str, self.alpha))})"


def multiindices(n: int, order: int) -> list:
    """All multiindices of exactly the given order, in a fixed order."""
    if n == 1:
        return [MultiIndex((order,))]
    out = []
    for first in range(order, -1, -1):
        for rest in multiindices(n - 1, order - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    return out


def multiindices_upto(n: int, order: int) -> list:
    return [a for k in range(order + 1) for a in multiindices(n, k)]


class MultiPairSet:
    """Finite set of multipairs that always contains every (L, 0)."""

    def __init__(self, n: int, m: int, pairs: Iterable = ()):
        self.n = n
        self.m = m
        s = {MultiPair(L, MultiIndex.zero(n)) for L in range(1, m + 1)}
        for p in pairs:
            L, alpha = p
            alpha = MultiIndex(alpha)
            if not 1 <= L <= m or len(alpha) != n:
                raise ValueError(f"multipair {p} outside signature ({n},{m})")
            s.add(MultiPair(L, alpha))
        self.pairs = frozenset(s)

    @property
    def order(self) -> int:
        return max((p.order for p in self.pairs), default=0)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs, key=MultiPair.sortkey))

    def __contains__(self, p) -> bool:
        L, alpha = p
        return MultiPair(L, MultiIndex(alpha)) in self.pairs

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPairSet) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self) -> str:
        return "{" + ", ".join(str(p) for p in self) + "}"


def prolong_set(A: MultiPairSet, ell: int) -> MultiPairSet:
    if ell < 0:
        raise ValueError("prolongation count must be >= 0")
    pairs = set(A.pairs)
    for _ in range(ell):
        pairs |= {MultiPair(p.L, p.alpha.plus(i)) for p in pairs for i in range(1, A.n + 1)}
    return MultiPairSet(A.n, A.m, pairs)


# --------------------------------------------------------------------------
# total derivatives


@lru_cache(maxsize=None)
def _shift_image(aid: int, i: int):
    a = atoms.get(aid)
    if a.kind == "x":
        return UNIT if a.index == i else None
    if a.kind == "jet":
        if i > len(a.alpha):
            raise ValueError(f"direction {i} outside jet signature of {a.text}")
        alpha = MultiIndex(a.alpha).plus(i)
        return r_atom(atoms.jet(a.L, alpha).id)
    return None


def total_derivative(e, i: int = 1) -> Expr:
    """D^i e, summing only over the jet coordinates that occur in e."""
    e = as_expr(e)
    return from_rat(r_derive(e.rat, lambda k: _shift_image(k, i)))


def total_derivative_multi(e, alpha) -> Expr:
    e = as_expr(e)
    for i, k in enumerate(MultiIndex(alpha), start=1):
        for _ in range(k):
            e = total_derivative(e, i)
    return e


def apply_vector_field(e, components: dict) -> Expr:
    """Sum over v of components[v] * de/dv; keys are variable Exprs or atoms."""
    e = as_expr(e)
    img = {}
    for k, v in components.items():
        aid = k.id if isinstance(k, atoms.Atom) else k.atom.id
        img[aid] = as_expr(v).rat
    return from_rat(r_derive(e.rat, img.get))


def pullback(e, fs: list, n: int = 1) -> Expr:
    """Substitute y^alpha_L -> d^alpha f_L for maps given as expressions in x."""
    e = as_expr(e)
    bind = {}
    for a in e.free_atoms():
        if a.kind != "jet":
            continue
        g = as_expr(fs[a.L - 1])
        for j, k in enumerate(a.alpha, start=1):
            for _ in range(k):
                g = g.diff(x(j))
        bind[var(a)] = g
    return substitute(e, bind) if bind else e


def coordinate_list(n: int, m: int, order: int) -> list:
    """Coordinates of J^order in a fixed order: x, then jets by order, L, alpha."""
    out = [x(i) for i in range(1, n + 1)]
    for k in range(order + 1):
        for L in range(1, m + 1):
            for alpha in multiindices(n, k):
                out.append(u(L, alpha))
    return out


__all__ = [
    "MultiIndex",
    "MultiPair",
    "MultiPairSet",
    "apply_vector_field",
    "coordinate_list",
    "multiindices",
    "multiindices_upto",
    "prolong_set",
    "pullback",
    "total_derivative",
    "total_derivative_multi",
]
