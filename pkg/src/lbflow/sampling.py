"""Seeded rational sample points for numeric residual checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .expr import Expr, SingularityError, as_expr, atoms
from .expr.ops import _Evaluator

DEN = 1000
GUARD = Fraction(1, 1000)

RANGES = {
    "x": (-1, 1),
    "jet0": (-1, 1),
    "jet1": (Fraction(1, 2), 2),
    "jet": (-1, 1),
    "param": (Fraction(-1, 10), Fraction(1, 10)),
}


def _range(a):
    if a.kind == "jet":
        return RANGES["jet0"] if a.order == 0 else RANGES["jet1"] if a.order == 1 else RANGES["jet"]
    return RANGES.get(a.kind, RANGES["jet"])


def rational_in(rng: random.Random, lo, hi, den: int = DEN) -> Fraction:
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


def sample_point(rng: random.Random, ids, fixed: dict | None = None) -> dict:
    """Atom id -> Fraction for every id, drawing from the per-kind ranges."""
    out = dict(fixed or {})
    for aid in sorted(ids, key=lambda a: atoms.get(a).key):
        if aid not in out:
            out[aid] = rational_in(rng, *_range(atoms.get(aid)))
    return out


def free_ids(exprs) -> set:
    s = set()
    for e in exprs:
        s |= as_expr(e).free_ids
    return s


def guarded_eval(exprs, vals: dict) -> list:
    """Evaluate expressions, raising SingularityError near any pole."""
    ev = _Evaluator(vals)
    out = []
    for e in exprs:
        r = as_expr(e).rat
        for f, _ in r.den:
            d = ev.poly(f.poly)
            if abs(d) < GUARD:
                raise SingularityError("sample too close to a pole")
        out.append(ev.rat(r))
    return out


def sample_points(exprs, samples: int, seed: int, fixed: dict | None = None, max_tries=None):
    """Yield (point, values) pairs at nonsingular points; stops after
    ``samples`` good points or ``max_tries`` attempts."""
    exprs = [as_expr(e) for e in exprs]
    ids = free_ids(exprs)
    rng = random.Random(seed)
    good = tries = 0
    max_tries = max_tries or 10 * samples + 10
    while good < samples and tries < max_tries:
        tries += 1
        pt = sample_point(rng, ids, fixed)
        try:
            vals = guarded_eval(exprs, pt)
        except (SingularityError, OverflowError):
            continue
        good += 1
        yield pt, vals


def max_abs_residual(exprs, samples: int = 100, seed: int = 42) -> tuple:
    """(max |value|, good samples) over seeded sample points."""
    worst = 0.0
    n = 0
    exprs = list(exprs)
    if not exprs:
        return 0.0, 0
    for _, vals in sample_points(exprs, samples, seed):
        n += 1
        for v in vals:
            worst = max(worst, abs(float(v)))
    return worst, n
