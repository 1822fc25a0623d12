"""Differentiation, zero testing, evaluation and substitution."""

from __future__ import annotations

import enum
import math
import random
from fractions import Fraction

from . import atoms as _atoms
from .poly import ONE, UNIT, ZERO, Rat, r_add, r_atom, r_const, r_inv, r_mul, r_pow
from .tree import Expr, SingularityError, UnboundVariableError, apply_func, as_expr, atom_id, from_rat

DEFAULT_SEED = 42
DEFAULT_ZERO_SAMPLES = 20
ZERO_TOL = 1e-12


class Zero(enum.Enum):
    ZERO = "provably-zero"
    NONZERO = "provably-nonzero"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


def diff(e, v) -> Expr:
    return as_expr(e).diff(v)


# --------------------------------------------------------------------------
# evaluation

_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


def _valuation_ids(valuation) -> dict:
    out = {}
    for k, v in valuation.items():
        if isinstance(k, str):
            from .parse import parse

            k = parse(k)
        out[atom_id(k)] = v
    return out


class _Evaluator:
    def __init__(self, vals: dict):
        self.vals = vals
        self.cache: dict = {}

    def atom(self, aid: int):
        v = self.vals.get(aid)
        if v is not None:
            return v
        v = self.cache.get(aid)
        if v is not None:
            return v
        a = _atoms.get(aid)
        if a.kind != "func":
            raise UnboundVariableError(a.text)
        arg = self.rat(a.arg.rat)
        try:
            v = _FUNCS[a.name](arg)
        except (ValueError, OverflowError) as exc:
            raise SingularityError(f"{a.name} undefined at {float(arg)!r}") from exc
        self.cache[aid] = v
        return v

    def poly(self, p: dict):
        total = 0
        for mono, c in p.items():
            t = c
            for aid, e in mono:
                t = t * self.atom(aid) ** e
            total = total + t
        return total

    def rat(self, r: Rat):
        num = self.poly(r.num)
        if not r.den:
            return num
        den = 1
        for f, e in r.den:
            den = den * self.poly(f.poly) ** e
        if den == 0:
            raise SingularityError("division by zero")
        if isinstance(num, (int, Fraction)) and isinstance(den, (int, Fraction)):
            return Fraction(num) / den
        return num / den


def evaluate(e, valuation):
    """Exact for rational inputs without function atoms, float otherwise."""
    e = as_expr(e)
    ev = _Evaluator(_valuation_ids(valuation))
    missing = [a for a in e.free_ids if a not in ev.vals]
    if missing:
        raise UnboundVariableError(", ".join(sorted(_atoms.get(a).text for a in missing)))
    return ev.rat(e.rat)


def evaluate_ids(e: Expr, vals: dict):
    """Evaluate with a valuation already keyed by atom id."""
    return _Evaluator(vals).rat(e.rat)


# --------------------------------------------------------------------------
# zero testing

def sample_value(rng: random.Random, lo=-2.0, hi=2.0, den=1000) -> Fraction:
    a, b = int(lo * den), int(hi * den)
    while True:
        p = rng.randint(a, b)
        if abs(p) >= den // 20:
            return Fraction(p, den)


def is_zero(e, samples: int = DEFAULT_ZERO_SAMPLES, seed: int = DEFAULT_SEED) -> Zero:
    """Tri-state zero test.

    A rational function without function atoms is zero iff its normal form is,
    so that case is decided exactly.  Otherwise the expression is sampled at
    random rational points; any clear nonzero value proves it nonzero, and a
    run of near-zero values only yields UNKNOWN.
    """
    e = as_expr(e)
    r = e.rat
    if r.is_zero:
        return Zero.ZERO
    if not r.func_atoms():
        return Zero.NONZERO
    rng = random.Random(seed)
    ids = sorted(e.free_ids, key=lambda a: _atoms.get(a).key)
    good = 0
    tries = 0
    while good < samples and tries < 5 * samples:
        tries += 1
        vals = {a: sample_value(rng) for a in ids}
        ev = _Evaluator(vals)
        try:
            num = ev.poly(r.num)
            for f, k in r.den:
                if ev.poly(f.poly) == 0:
                    raise SingularityError("pole")
            scale = sum(abs(float(c)) * abs(float(_mono_val(ev, m))) for m, c in r.num.items())
        except (SingularityError, OverflowError):
            continue
        good += 1
        if abs(float(num)) > ZERO_TOL * max(1.0, scale):
            return Zero.NONZERO
    return Zero.UNKNOWN


def _mono_val(ev: _Evaluator, mono):
    t = 1
    for aid, k in mono:
        t = t * ev.atom(aid) ** k
    return t


def zero_verdict(e, **kw) -> Zero:
    return is_zero(e, **kw)


# --------------------------------------------------------------------------
# substitution

class _Substituter:
    def __init__(self, bindings: dict):
        self.bind = bindings
        self.memo: dict = {}

    def atom(self, aid: int) -> Rat:
        r = self.memo.get(aid)
        if r is not None:
            return r
        if aid in self.bind:
            r = self.bind[aid]
        else:
            a = _atoms.get(aid)
            if a.kind == "func" and self.bind.keys() & a.free:
                arg = from_rat(self.rat(a.arg.rat))
                r = apply_func(a.name, arg).rat
            else:
                r = r_atom(aid)
        self.memo[aid] = r
        return r

    def poly(self, p: dict) -> Rat:
        total = ZERO
        for mono, c in p.items():
            t = r_const(c)
            for aid, k in mono:
                t = r_mul(t, r_pow(self.atom(aid), k))
            total = r_add(total, t)
        return total

    def rat(self, r: Rat) -> Rat:
        if not (self.bind.keys() & r.free()):
            return r
        out = self.poly(r.num)
        for f, k in r.den:
            d = self.poly(f.poly)
            if d.is_zero:
                raise SingularityError("substitution makes a denominator vanish")
            out = r_mul(out, r_pow(r_inv(d), k))
        return out


def substitute(e, bindings) -> Expr:
    e = as_expr(e)
    b = {}
    for k, v in bindings.items():
        if isinstance(k, str):
            from .parse import parse

            k = parse(k)
        b[atom_id(k)] = as_expr(v).rat
    return from_rat(_Substituter(b).rat(e.rat))
