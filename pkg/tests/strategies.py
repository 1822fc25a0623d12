"""Hypothesis strategies for small random expressions and fields."""

from fractions import Fraction

from hypothesis import strategies as st

from lbflow.expr import const, u, x
from lbflow.field import LBField

small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def coords(n=1, m=2, order=2):
    out = [x(i) for i in range(1, n + 1)]
    for L in range(1, m + 1):
        for k in range(order + 1):
            if n == 1:
                out.append(u(L, (k,)))
    return out


@st.composite
def polynomials(draw, n=1, m=2, order=2, max_terms=3, max_deg=2):
    vs = coords(n, m, order)
    e = const(draw(small_fracs))
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(small_fracs)
        term = const(c)
        for _ in range(draw(st.integers(1, max_deg))):
            term = term * draw(st.sampled_from(vs))
        e = e + term
    return e


@st.composite
def rationals(draw, order=1):
    num = draw(polynomials(order=order))
    den = draw(polynomials(order=order, max_terms=1, max_deg=1))
    return num / (den * den + 1) if den.is_const else num / (den ** 2 + 1)


@st.composite
def poly_fields(draw, m=None, order=1):
    m = m or draw(st.sampled_from([1, 2]))
    xi = draw(polynomials(m=m, order=order, max_terms=2))
    eta = [draw(polynomials(m=m, order=order, max_terms=2)) for _ in range(m)]
    return LBField(1, m, [xi], eta)
