"""Immutable expression trees.

Every :class:`Expr` is built from a canonical rational function (:class:`Rat`)
and exposes a tree view of it.  Arithmetic on trees goes through the rational
layer, so sums and products are always flattened, sorted and combined.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from . import atoms as _atoms
from .poly import (
    ONE,
    UNIT,
    ZERO,
    Rat,
    mono_sortkey,
    p_sorted_terms,
    r_add,
    r_atom,
    r_const,
    r_diff,
    r_inv,
    r_mul,
    r_neg,
    r_pow,
    r_sub,
)


class SingularityError(ZeroDivisionError):
    """Evaluation hit a pole or left the domain of a function."""


class UnboundVariableError(KeyError):
    pass


def _fmt_const(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class Expr:
    """Normal-form expression node.

    kind is one of const, var, sum, prod, pow, quot, func.
    """

    __slots__ = ("kind", "children", "value", "atom", "exp", "rat", "_str", "__weakref__")

    def __init__(self, kind, children=(), value=None, atom=None, exp=None, rat=None):
        self.kind = kind
        self.children = tuple(children)
        self.value = value
        self.atom = atom
        self.exp = exp
        self.rat = rat
        self._str = None

    # -- identity -----------------------------------------------------------
    def __str__(self) -> str:
        if self._str is None:
            self._str = _render(self)
        return self._str

    def __repr__(self) -> str:
        return f"Expr({self})"

    def __hash__(self) -> int:
        return hash(str(self))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self is other or str(self) == str(other)

    def __bool__(self) -> bool:
        return not self.rat.is_zero

    # -- queries -----------------------------------------------------------
    @property
    def free_ids(self) -> frozenset:
        return self.rat.free()

    @property
    def is_const(self) -> bool:
        return self.rat.is_const

    @property
    def is_rational(self) -> bool:
        """True when no function atoms occur."""
        return not self.rat.func_atoms()

    def const_value(self) -> Fraction:
        if not self.rat.is_const:
            raise ValueError(f"{self} is not constant")
        return Fraction(self.rat.const_value())

    def free_atoms(self) -> list:
        return sorted((_atoms.get(i) for i in self.free_ids), key=lambda a: a.key)

    def jets(self) -> list:
        return [a for a in self.free_atoms() if a.kind == "jet"]

    def jet_order(self) -> int:
        """Highest jet order that occurs, -1 when no jet occurs."""
        return max((a.order for a in self.jets()), default=-1)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        return from_rat(r_add(self.rat, other.rat))

    __radd__ = __add__

    def __sub__(self, other):
        return from_rat(r_sub(self.rat, as_expr(other).rat))

    def __rsub__(self, other):
        return from_rat(r_sub(as_expr(other).rat, self.rat))

    def __neg__(self):
        return from_rat(r_neg(self.rat))

    def __pos__(self):
        return self

    def __mul__(self, other):
        return from_rat(r_mul(self.rat, as_expr(other).rat))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return from_rat(r_mul(self.rat, inverse_rat(as_expr(other))))

    def __rtruediv__(self, other):
        return from_rat(r_mul(as_expr(other).rat, inverse_rat(self)))

    def __pow__(self, k):
        if isinstance(k, Expr):
            k = k.const_value()
        k = Fraction(k)
        if k.denominator != 1:
            raise ValueError("only integer powers are supported")
        k = int(k)
        if k >= 0:
            return from_rat(r_pow(self.rat, k))
        return from_rat(r_pow(inverse_rat(self), -k))

    # -- calculus and evaluation -----------------------------------------------
    def diff(self, v) -> "Expr":
        return from_rat(r_diff(self.rat, atom_id(v)))

    def subs(self, bindings) -> "Expr":
        from .ops import substitute

        return substitute(self, bindings)

    def eval(self, valuation):
        from .ops import evaluate

        return evaluate(self, valuation)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction, Rational)):
        return const(v)
    if isinstance(v, float):
        return const(Fraction(v))
    if isinstance(v, str):
        from .parse import parse

        return parse(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Expr")


def atom_id(v) -> int:
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, _atoms.Atom):
        return v.id
    if isinstance(v, Expr) and v.kind == "var":
        return v.atom.id
    raise TypeError(f"not a variable: {v!r}")


def inverse_rat(e: Expr) -> Rat:
    """1/e, inverting product structure factor by factor."""
    k = e.kind
    if k == "prod":
        r = UNIT
        for c in e.children:
            r = r_mul(r, inverse_rat(c))
        return r
    if k == "pow":
        return r_pow(inverse_rat(e.children[0]), e.exp)
    if k == "quot":
        return r_mul(e.children[1].rat, inverse_rat(e.children[0]))
    if e.rat.is_zero:
        raise ZeroDivisionError("division by zero expression")
    return r_inv(e.rat)


# --------------------------------------------------------------------------
# leaves

_CONST_CACHE: dict = {}


def const(c) -> Expr:
    c = Fraction(c)
    e = _CONST_CACHE.get(c)
    if e is None:
        e = Expr("const", value=c, rat=r_const(c))
        if len(_CONST_CACHE) < 4096:
            _CONST_CACHE[c] = e
    return e


_VAR_CACHE: dict = {}


def var(a: _atoms.Atom) -> Expr:
    e = _VAR_CACHE.get(a.id)
    if e is None:
        if a.kind == "func":
            e = Expr("func", (a.arg,), atom=a, rat=r_atom(a.id))
        else:
            e = Expr("var", atom=a, rat=r_atom(a.id))
        _VAR_CACHE[a.id] = e
    return e


def x(i: int) -> Expr:
    return var(_atoms.base(i))


def u(L: int, alpha) -> Expr:
    if isinstance(alpha, int):
        alpha = (alpha,)
    return var(_atoms.jet(L, alpha))


def param(name: str) -> Expr:
    return var(_atoms.param(name))


def _exact_sqrt(c: Fraction):
    if c < 0:
        return None
    p, q = c.numerator, c.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def apply_func(name: str, arg) -> Expr:
    """Elementary function node with the obvious constant foldings."""
    arg = as_expr(arg)
    if arg.is_const:
        c = arg.const_value()
        if name in ("sin",) and c == 0:
            return const(0)
        if name in ("cos", "exp") and c == 0:
            return const(1)
        if name == "ln" and c == 1:
            return const(0)
        if name == "sqrt":
            r = _exact_sqrt(c)
            if r is not None:
                return const(r)
    if name == "ln" and arg.kind == "func" and arg.atom.name == "exp":
        return arg.children[0]
    return var(_atoms.func(name, arg))


# --------------------------------------------------------------------------
# rat -> tree

def _mono_tree(mono) -> list:
    out = []
    for aid, e in sorted(mono, key=lambda ae: _atoms.get(ae[0]).key):
        base = var(_atoms.get(aid))
        if e == 1:
            out.append(base)
        else:
            out.append(Expr("pow", (base,), exp=e, rat=r_pow(base.rat, e)))
    return out


def _poly_tree(poly: dict) -> Expr:
    if not poly:
        return const(0)
    terms = []
    for mono, c in p_sorted_terms(poly):
        if mono == ONE:
            terms.append(const(c))
            continue
        factors = _mono_tree(mono)
        r = Rat({mono: c})
        if c == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif c == 1:
            terms.append(Expr("prod", factors, rat=r))
        else:
            terms.append(Expr("prod", [const(c)] + factors, rat=r))
    if len(terms) == 1:
        return terms[0]
    return Expr("sum", terms, rat=Rat(poly))


def from_rat(r: Rat) -> Expr:
    if not r.den:
        if r.is_const:
            return const(r.const_value())
        if len(r.num) == 1:
            ((mono, c),) = r.num.items()
            if c == 1 and len(mono) == 1 and mono[0][1] == 1:
                return var(_atoms.get(mono[0][0]))
        return _poly_tree(r.num)
    num = _poly_tree(r.num)
    dens = []
    for f, e in r.den:
        base = _poly_tree(f.poly)
        if e == 1:
            dens.append(base)
        else:
            dens.append(Expr("pow", (base,), exp=e, rat=r_pow(base.rat, e)))
    if len(dens) == 1:
        den = dens[0]
    else:
        den = Expr("prod", dens, rat=Rat(r.den_poly()))
    return Expr("quot", (num, den), rat=r)


# --------------------------------------------------------------------------
# printing

def _wrap(e: Expr, s: str) -> str:
    return f"({s})" if e.kind == "sum" or (e.kind == "const" and e.value < 0) else s


def _render_prod(e: Expr) -> str:
    parts = []
    for c in e.children:
        s = str(c)
        if c.kind == "sum" or c.kind == "quot":
            s = f"({s})"
        parts.append(s)
    if e.children[0].kind == "const":
        c = e.children[0].value
        if c == -1:
            return "-" + "*".join(parts[1:])
    return "*".join(parts)


def _render(e: Expr) -> str:
    k = e.kind
    if k == "const":
        return _fmt_const(e.value)
    if k == "var":
        return e.atom.text
    if k == "func":
        return f"{e.atom.name}({e.children[0]})"
    if k == "pow":
        b = e.children[0]
        s = str(b)
        if b.kind in ("sum", "prod", "quot", "pow") or (b.kind == "const" and (b.value < 0 or b.value.denominator != 1)):
            s = f"({s})"
        return f"{s}^{e.exp}"
    if k == "prod":
        return _render_prod(e)
    if k == "sum":
        out = str(e.children[0])
        for c in e.children[1:]:
            s = str(c)
            if s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out
    if k == "quot":
        num, den = e.children
        ns = str(num)
        if num.kind == "sum":
            ns = f"({ns})"
        ds = str(den)
        if den.kind in ("sum", "prod"):
            ds = f"({ds})"
        return f"{ns}/{ds}"
    raise ValueError(k)


def sort_key(e: Expr):
    """Total order on expressions used for deterministic listings."""
    return str(e)


__all__ = [
    "Expr",
    "SingularityError",
    "UnboundVariableError",
    "apply_func",
    "as_expr",
    "atom_id",
    "const",
    "from_rat",
    "inverse_rat",
    "mono_sortkey",
    "param",
    "u",
    "var",
    "x",
    "ZERO",
]
