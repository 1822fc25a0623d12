"""Sparse multivariate polynomials and rational functions over Q.

A polynomial is a plain ``dict`` mapping monomials to nonzero rational
coefficients (``int`` or ``Fraction``).  A monomial is a tuple of
``(atom_id, exponent)`` pairs sorted by atom id.

A :class:`Rat` is ``num / prod(f**e)`` where every denominator factor ``f`` is
an interned, monic, content-free polynomial.  Keeping the denominator factored
avoids the blow-up of naive cross-multiplication and lets cancellation work by
exact division instead of a multivariate gcd.  Zero testing is exact: a
rational function is zero iff its numerator polynomial is empty.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from . import atoms as _atoms

ONE = ()


# --------------------------------------------------------------------------
# monomials

def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def mono_div(a: tuple, b: tuple):
    """``a / b`` or ``None`` when b does not divide a."""
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        v = d.get(k, 0) - e
        if v < 0:
            return None
        if v:
            d[k] = v
        else:
            del d[k]
    return tuple(sorted(d.items()))


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


@lru_cache(maxsize=1 << 17)
def mono_sortkey(m: tuple) -> tuple:
    """Graded lexicographic key: higher degree first, then by atom order."""
    items = sorted((_atoms.get(i).key, e) for i, e in m)
    return (-sum(e for _, e in items), tuple((k, -e) for k, e in items))


# --------------------------------------------------------------------------
# polynomials

def p_const(c) -> dict:
    return {ONE: c} if c else {}


def p_atom(atom_id: int, exp: int = 1) -> dict:
    return {((atom_id, exp),): 1}


def p_add(p: dict, q: dict) -> dict:
    if len(p) < len(q):
        p, q = q, p
    r = dict(p)
    for m, c in q.items():
        v = r.get(m, 0) + c
        if v:
            r[m] = v
        else:
            r.pop(m, None)
    return r


def p_neg(p: dict) -> dict:
    return {m: -c for m, c in p.items()}


def p_sub(p: dict, q: dict) -> dict:
    return p_add(p, p_neg(q))


def p_scale(p: dict, c) -> dict:
    if not c:
        return {}
    if c == 1:
        return p
    return {m: v * c for m, v in p.items()}


def p_mul_term(p: dict, mono: tuple, c) -> dict:
    return {mono_mul(m, mono): v * c for m, v in p.items()}


def p_mul(p: dict, q: dict) -> dict:
    if not p or not q:
        return {}
    if len(p) < len(q):
        p, q = q, p
    if len(q) == 1:
        ((mq, cq),) = q.items()
        return p_mul_term(p, mq, cq)
    r: dict = {}
    get = r.get
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            r[m] = get(m, 0) + c1 * c2
    return {m: c for m, c in r.items() if c}


def p_pow(p: dict, k: int) -> dict:
    if k < 0:
        raise ValueError("negative polynomial power")
    result = {ONE: 1}
    base = p
    while k:
        if k & 1:
            result = p_mul(result, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return result


def p_is_const(p: dict) -> bool:
    return not p or (len(p) == 1 and ONE in p)


def p_const_value(p: dict):
    return p.get(ONE, 0)


def p_atoms(p: dict) -> set:
    s = set()
    for m in p:
        for k, _ in m:
            s.add(k)
    return s


def p_lead(p: dict):
    m = min(p, key=mono_sortkey)
    return m, p[m]


def p_sorted_terms(p: dict) -> list:
    return sorted(p.items(), key=lambda mc: mono_sortkey(mc[0]))


def p_divexact(p: dict, f: dict):
    """Exact quotient ``p / f`` or ``None`` if f does not divide p."""
    if not f:
        raise ZeroDivisionError("polynomial division by zero")
    if len(f) == 1:
        ((mf, cf),) = f.items()
        out = {}
        for m, c in p.items():
            q = mono_div(m, mf)
            if q is None:
                return None
            out[q] = Fraction(c) / cf
        return out
    fm, fc = p_lead(f)
    r = dict(p)
    q: dict = {}
    while r:
        m, c = p_lead(r)
        qm = mono_div(m, fm)
        if qm is None:
            return None
        qc = Fraction(c) / fc
        q[qm] = qc
        for mf, cf in f.items():
            mm = mono_mul(mf, qm)
            v = r.get(mm, 0) - cf * qc
            if v:
                r[mm] = v
            else:
                r.pop(mm, None)
    return q


def p_diff_atom(p: dict, atom_id: int) -> dict:
    """Derivative treating ``atom_id`` as an independent indeterminate."""
    r: dict = {}
    for m, c in p.items():
        for j, (k, e) in enumerate(m):
            if k == atom_id:
                nm = m[:j] + (((k, e - 1),) if e > 1 else ()) + m[j + 1:]
                r[nm] = r.get(nm, 0) + c * e
                break
    return {m: c for m, c in r.items() if c}


def p_split_content(p: dict):
    """Return ``(c, mono, rest)`` with ``p = c * mono * rest`` and rest monic
    and free of monomial content.  ``rest`` is ``None`` when p is a monomial."""
    it = iter(p)
    first = next(it)
    content = dict(first)
    for m in it:
        if not content:
            break
        md = dict(m)
        for k in list(content):
            e = md.get(k, 0)
            if e < content[k]:
                if e:
                    content[k] = e
                else:
                    del content[k]
    mono = tuple(sorted(content.items()))
    if mono:
        p = {mono_div(m, mono): c for m, c in p.items()}
    if len(p) == 1:
        ((_, c),) = p.items()
        return c, mono, None
    _, lc = p_lead(p)
    if lc != 1:
        p = {m: Fraction(c) / lc for m, c in p.items()}
    return lc, mono, p


# --------------------------------------------------------------------------
# denominator factors

class Factor:
    """Interned monic polynomial used as a denominator factor."""

    __slots__ = ("poly", "atoms", "atom_id", "sortkey")

    def __repr__(self) -> str:
        return f"Factor({self.poly})"


_FACTORS: dict[frozenset, Factor] = {}


def factor_of(poly: dict) -> Factor:
    key = frozenset(poly.items())
    f = _FACTORS.get(key)
    if f is None:
        f = Factor()
        f.poly = poly
        f.atoms = frozenset(p_atoms(poly))
        f.atom_id = None
        if len(poly) == 1:
            ((m, _),) = poly.items()
            if len(m) == 1 and m[0][1] == 1:
                f.atom_id = m[0][0]
        f.sortkey = tuple(sorted((mono_sortkey(m), c) for m, c in poly.items()))
        f = _FACTORS.setdefault(key, f)
    return f


def atom_factor(atom_id: int) -> Factor:
    return factor_of(p_atom(atom_id))


# --------------------------------------------------------------------------
# rational functions

class Rat:
    __slots__ = ("num", "den", "_free", "_atoms")

    def __init__(self, num: dict, den: tuple = ()):
        self.num = num
        self.den = den
        self._free = None
        self._atoms = None

    def __repr__(self) -> str:
        return f"Rat({self.num}, {self.den})"

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_poly(self) -> bool:
        return not self.den

    @property
    def is_const(self) -> bool:
        return not self.den and p_is_const(self.num)

    def const_value(self):
        return p_const_value(self.num)

    def atoms(self) -> frozenset:
        """Atom ids occurring at the top level (variables and function atoms)."""
        if self._atoms is None:
            s = p_atoms(self.num)
            for f, _ in self.den:
                s |= f.atoms
            self._atoms = frozenset(s)
        return self._atoms

    def free(self) -> frozenset:
        """Variable atom ids, looking through function arguments."""
        if self._free is None:
            s = set()
            for a in self.atoms():
                s |= _atoms.get(a).free
            self._free = frozenset(s)
        return self._free

    def func_atoms(self) -> list:
        return [a for a in self.atoms() if _atoms.get(a).kind == "func"]

    def den_poly(self) -> dict:
        d = {ONE: 1}
        for f, e in self.den:
            d = p_mul(d, p_pow(f.poly, e))
        return d


ZERO = Rat({})
UNIT = Rat({ONE: 1})


def r_const(c) -> Rat:
    return Rat(p_const(c))


def r_atom(atom_id: int) -> Rat:
    return Rat(p_atom(atom_id))


def _sorted_den(d: dict) -> tuple:
    return tuple(sorted(((f, e) for f, e in d.items() if e), key=lambda fe: fe[0].sortkey))


def _cancel(num: dict, den: dict) -> Rat:
    if not num:
        return ZERO
    if not den:
        return Rat(num)
    num_atoms = None
    for f in sorted(den, key=lambda f: f.sortkey):
        e = den[f]
        if num_atoms is None:
            num_atoms = p_atoms(num)
        if not f.atoms <= num_atoms:
            continue
        if f.atom_id is not None:
            k = f.atom_id
            low = e
            for m in num:
                got = 0
                for a, x in m:
                    if a == k:
                        got = x
                        break
                if got < low:
                    low = got
                    if not low:
                        break
            if low:
                num = {mono_div(m, ((k, low),)): c for m, c in num.items()}
                den[f] = e - low
                num_atoms = None
            continue
        while e:
            q = p_divexact(num, f.poly)
            if q is None:
                break
            num = q
            e -= 1
            num_atoms = None
        den[f] = e
    return Rat(num, _sorted_den(den))


def r_make(num: dict, den: dict) -> Rat:
    return _cancel(num, dict(den))


def r_add(a: Rat, b: Rat) -> Rat:
    if not a.num:
        return b
    if not b.num:
        return a
    if not a.den and not b.den:
        return Rat(p_add(a.num, b.num))
    if a.den == b.den:
        return _cancel(p_add(a.num, b.num), dict(a.den))
    da, db = dict(a.den), dict(b.den)
    lcm = dict(da)
    for f, e in db.items():
        if e > lcm.get(f, 0):
            lcm[f] = e
    na, nb = a.num, b.num
    for f, e in lcm.items():
        if e > da.get(f, 0):
            na = p_mul(na, p_pow(f.poly, e - da.get(f, 0)))
        if e > db.get(f, 0):
            nb = p_mul(nb, p_pow(f.poly, e - db.get(f, 0)))
    return _cancel(p_add(na, nb), lcm)


def r_neg(a: Rat) -> Rat:
    return Rat(p_neg(a.num), a.den)


def r_sub(a: Rat, b: Rat) -> Rat:
    return r_add(a, r_neg(b))


def r_scale(a: Rat, c) -> Rat:
    if not c:
        return ZERO
    return Rat(p_scale(a.num, c), a.den)


def r_mul(a: Rat, b: Rat) -> Rat:
    if not a.num or not b.num:
        return ZERO
    if not a.den and not b.den:
        return Rat(p_mul(a.num, b.num))
    den = dict(a.den)
    for f, e in b.den:
        den[f] = den.get(f, 0) + e
    if not b.den and p_is_const(b.num):
        return Rat(p_scale(a.num, p_const_value(b.num)), a.den)
    return _cancel(p_mul(a.num, b.num), den)


def poly_as_den(p: dict):
    """Split polynomial ``p`` into ``(c, {Factor: exp})`` with p = c * prod."""
    c, mono, rest = p_split_content(p)
    den: dict = {}
    for k, e in mono:
        den[atom_factor(k)] = e
    if rest is not None:
        f = factor_of(rest)
        den[f] = den.get(f, 0) + 1
    return c, den


def r_inv(a: Rat) -> Rat:
    if not a.num:
        raise ZeroDivisionError("inverse of zero rational function")
    c, den = poly_as_den(a.num)
    num = {ONE: Fraction(1) / c if not isinstance(c, int) or c not in (1, -1) else c}
    for f, e in a.den:
        num = p_mul(num, p_pow(f.poly, e))
    return _cancel(num, den)


def r_div(a: Rat, b: Rat) -> Rat:
    return r_mul(a, r_inv(b))


def r_pow(a: Rat, k: int) -> Rat:
    if k == 0:
        return UNIT
    if k < 0:
        return r_pow(r_inv(a), -k)
    if k == 1:
        return a
    return Rat(p_pow(a.num, k), tuple((f, e * k) for f, e in a.den))


def r_equal(a: Rat, b: Rat) -> bool:
    return r_sub(a, b).is_zero


# --------------------------------------------------------------------------
# differentiation

def _dfunc(at) -> Rat:
    """d f(u) / du for a function atom, as a rational function."""
    name = at.name
    if name == "sin":
        return r_atom(_atoms.func("cos", at.arg).id)
    if name == "cos":
        return r_neg(r_atom(_atoms.func("sin", at.arg).id))
    if name == "exp":
        return r_atom(at.id)
    if name == "ln":
        return r_inv(at.arg.rat)
    if name == "sqrt":
        return Rat({ONE: Fraction(1, 2)}, ((atom_factor(at.id), 1),))
    raise ValueError(name)


def p_diff(p: dict, var_id: int) -> Rat:
    """Total partial derivative of a polynomial in atoms w.r.t. a variable."""
    out = Rat(p_diff_atom(p, var_id))
    for a in p_atoms(p):
        at = _atoms.get(a)
        if at.kind != "func" or var_id not in at.free:
            continue
        inner = r_diff(at.arg.rat, var_id)
        if inner.is_zero:
            continue
        out = r_add(out, r_mul(Rat(p_diff_atom(p, a)), r_mul(_dfunc(at), inner)))
    return out


def r_diff(a: Rat, var_id: int) -> Rat:
    if var_id not in a.free():
        return ZERO
    out = p_diff(a.num, var_id)
    if a.den:
        out = r_mul(out, Rat({ONE: 1}, a.den))
        for f, e in a.den:
            if var_id not in f.atoms and not any(
                var_id in _atoms.get(k).free for k in f.atoms
            ):
                continue
            df = p_diff(f.poly, var_id)
            if df.is_zero:
                continue
            den = dict(a.den)
            den[f] = den[f] + 1
            term = r_make(p_scale(a.num, -e), den)
            out = r_add(out, r_mul(term, df))
    return out


def r_derive(a: Rat, image, memo: dict | None = None) -> Rat:
    """Apply the derivation sending each variable atom ``v`` to ``image(v)``.

    ``image`` returns a Rat or ``None`` (meaning zero).  Function atoms are
    handled by the chain rule, so the result is the vector field
    ``sum_v image(v) d/dv`` applied to ``a``.
    """
    if memo is None:
        memo = {}

    def atom_img(k):
        if k in memo:
            return memo[k]
        at = _atoms.get(k)
        if at.kind == "func":
            inner = r_derive(at.arg.rat, image, memo)
            r = None if inner.is_zero else r_mul(_dfunc(at), inner)
        else:
            r = image(k)
            if r is not None and r.is_zero:
                r = None
        memo[k] = r
        return r

    def poly_der(p: dict) -> Rat:
        direct: dict = {}
        out = ZERO
        for k in p_atoms(p):
            img = atom_img(k)
            if img is None:
                continue
            dp = p_diff_atom(p, k)
            if img.is_poly:
                direct = p_add(direct, p_mul(dp, img.num))
            else:
                out = r_add(out, r_mul(Rat(dp), img))
        return r_add(Rat(direct), out)

    out = poly_der(a.num)
    if not a.den:
        return out
    out = r_mul(out, Rat({ONE: 1}, a.den))
    for f, e in a.den:
        df = poly_der(f.poly)
        if df.is_zero:
            continue
        den = dict(a.den)
        den[f] = den[f] + 1
        out = r_add(out, r_mul(r_make(p_scale(a.num, -e), den), df))
    return out
