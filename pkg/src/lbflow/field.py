"""LB fields given by their principal components, and their prolongations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, Zero, as_expr, is_zero, parse, u, x
from .expr.parse import Signature
from .jet import MultiIndex, MultiPair, apply_vector_field, multiindices, total_derivative
from .report import CheckEntry, verdict_from_zero


class SignatureError(ValueError):
    pass


class LBField:
    """xi_i (n of them) and eta0_L (m of them) as expressions on J^inf."""

    def __init__(self, n: int, m: int, xi, eta0, name: str | None = None):
        if n < 1 or m < 1:
            raise SignatureError("n and m must be positive")
        xi = [as_expr(e) for e in xi]
        eta0 = [as_expr(e) for e in eta0]
        if len(xi) != n or len(eta0) != m:
            raise SignatureError(f"expected {n} xi and {m} eta0 components")
        for e in xi + eta0:
            _check_signature(e, n, m)
        self.n = n
        self.m = m
        self.xi = tuple(xi)
        self.eta0 = tuple(eta0)
        self.name = name

    @classmethod
    def from_strings(cls, n, m, xi, eta0, name=None):
        sig = Signature(n, m)
        return cls(n, m, [parse(s, sig) for s in xi], [parse(s, sig) for s in eta0], name)

    @property
    def order(self) -> int:
        """Highest jet order among the principal components (recomputed)."""
        return max([max(e.jet_order(), 0) for e in self.xi + self.eta0])

    @property
    def components(self) -> tuple:
        return self.xi + self.eta0

    def __repr__(self) -> str:
        xs = ", ".join(map(str, self.xi))
        es = ", ".join(map(str, self.eta0))
        return f"LBField(n={self.n}, m={self.m}, xi=[{xs}], eta0=[{es}])"


def _check_signature(e: Expr, n: int, m: int):
    for a in e.free_atoms():
        if a.kind == "x" and a.index > n:
            raise SignatureError(f"{a.text} outside n={n}")
        if a.kind == "jet" and (a.L > m or len(a.alpha) != n):
            raise SignatureError(f"{a.text} outside signature ({n},{m})")
        if a.kind == "param":
            raise SignatureError(f"parameter {a.text} not allowed in a field component")


def epsilon0(f: LBField) -> list:
    """eps0_L = eta0_L - sum_i y^i_L xi_i."""
    out = []
    for L in range(1, f.m + 1):
        e = f.eta0[L - 1]
        for i in range(1, f.n + 1):
            e = e - u(L, MultiIndex.unit(f.n, i)) * f.xi[i - 1]
        out.append(e)
    return out


@dataclass
class ProlongedField:
    field: LBField
    order: int
    eta: dict = field(default_factory=dict)
    eps: dict = field(default_factory=dict)

    def key(self, L, alpha) -> MultiPair:
        return MultiPair(L, MultiIndex(alpha))

    def eta_of(self, L, alpha) -> Expr:
        return self.eta[self.key(L, alpha)]

    def eps_of(self, L, alpha) -> Expr:
        return self.eps[self.key(L, alpha)]

    def pairs(self) -> list:
        return sorted(self.eta, key=MultiPair.sortkey)

    def vector_components(self) -> dict:
        """Map coordinate Expr -> component, for x and all prolonged jets."""
        comps = {x(i): self.field.xi[i - 1] for i in range(1, self.field.n + 1)}
        for p in self.pairs():
            comps[p.coord()] = self.eta[p]
        return comps


def _eps_from_eta(f: LBField, L: int, alpha: MultiIndex, eta: Expr) -> Expr:
    e = eta
    for i in range(1, f.n + 1):
        e = e - u(L, alpha.plus(i)) * f.xi[i - 1]
    return e


class _DXi:
    def __init__(self, f):
        self.f = f
        self.cache = {}

    def __call__(self, i, j) -> Expr:
        key = (i, j)
        if key not in self.cache:
            self.cache[key] = total_derivative(self.f.xi[i - 1], j)
        return self.cache[key]


def prolong_step(f: LBField, eta_alpha: Expr, L: int, alpha: MultiIndex, j: int, dxi=None) -> Expr:
    """eta^{alpha+j}_L = D^j eta^alpha_L - sum_i y^{alpha+i}_L D^j xi_i."""
    dxi = dxi or _DXi(f)
    out = total_derivative(eta_alpha, j)
    for i in range(1, f.n + 1):
        d = dxi(i, j)
        if d:
            out = out - u(L, alpha.plus(i)) * d
    return out


def prolong(f: LBField, k: int) -> ProlongedField:
    if k < 0:
        raise ValueError("prolongation order must be >= 0")
    p = ProlongedField(f, k)
    dxi = _DXi(f)
    zero = MultiIndex.zero(f.n)
    for L in range(1, f.m + 1):
        p.eta[MultiPair(L, zero)] = f.eta0[L - 1]
    for order in range(1, k + 1):
        for L in range(1, f.m + 1):
            for alpha in multiindices(f.n, order):
                j = next(i for i in range(1, f.n + 1) if alpha[i - 1] > 0)
                beta = alpha.minus(j)
                p.eta[MultiPair(L, alpha)] = prolong_step(
                    f, p.eta[MultiPair(L, beta)], L, beta, j, dxi
                )
    for key, eta in p.eta.items():
        p.eps[key] = _eps_from_eta(f, key.L, key.alpha, eta)
    return p


def prolong_along(f: LBField, L: int, path) -> Expr:
    """eta along an explicit sequence of unit directions (path independence)."""
    alpha = MultiIndex.zero(f.n)
    eta = f.eta0[L - 1]
    dxi = _DXi(f)
    for j in path:
        eta = prolong_step(f, eta, L, alpha, j, dxi)
        alpha = alpha.plus(j)
    return eta


def verify_lb_identity(p: ProlongedField, **zero_kw) -> CheckEntry:
    """eps^{alpha+i}_L - D^i eps^alpha_L must vanish for |alpha| < order."""
    f = p.field
    states = []
    failures = []
    for key in p.pairs():
        if key.order >= p.order:
            continue
        for i in range(1, f.n + 1):
            target = MultiPair(key.L, key.alpha.plus(i))
            diff = p.eps[target] - total_derivative(p.eps[key], i)
            z = is_zero(diff, **zero_kw)
            states.append(z)
            if z is not Zero.ZERO:
                failures.append({"L": key.L, "alpha": list(key.alpha), "i": i,
                                 "status": z.value, "residual": str(diff)})
    verdict = verdict_from_zero(states) if states else "skipped"
    return CheckEntry(
        name="lb_identity",
        verdict=verdict,
        residual=len(failures),
        witness=failures[0] if failures else None,
        mode="symbolic",
        detail={"order": p.order, "checked": len(states), "failures": failures},
    )


def apply_field(p: ProlongedField, g) -> Expr:
    """X(g) for g whose jets have order <= p.order."""
    g = as_expr(g)
    if g.jet_order() > p.order:
        raise ValueError(f"prolongation order {p.order} too low for {g}")
    return apply_vector_field(g, p.vector_components())


def commutator_defect(f: LBField, p: ProlongedField, i: int = 1, **zero_kw) -> CheckEntry:
    """Check [D^i, X] = sum_j (D^i xi_j) D^j on coordinates of order < p.order."""
    coords = [x(j) for j in range(1, f.n + 1)]
    coords += [k.coord() for k in p.pairs() if k.order < p.order]
    dxi = [total_derivative(f.xi[j - 1], i) for j in range(1, f.n + 1)]
    rows = []
    states = []
    for g in coords:
        lhs = total_derivative(apply_field(p, g), i) - apply_field(p, total_derivative(g, i))
        rhs = sum((dxi[j - 1] * total_derivative(g, j) for j in range(1, f.n + 1)), as_expr(0))
        z = is_zero(lhs - rhs, **zero_kw)
        states.append(z)
        rows.append({"coordinate": str(g), "status": z.value})
    return CheckEntry(
        name=f"commutator_D{i}",
        verdict=verdict_from_zero(states),
        residual=sum(1 for s in states if s is not Zero.ZERO),
        mode="symbolic",
        detail=rows,
    )
