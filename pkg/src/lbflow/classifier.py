"""Dependency graphs on components, the cycle condition, xi recovery and a
bounded footprint probe."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, Zero, as_expr, const, is_zero, u, x
from .field import LBField, prolong
from .jet import MultiIndex, apply_vector_field, total_derivative
from .report import CheckEntry


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    alpha: tuple
    undecided: bool = False

    @property
    def zero_label(self) -> bool:
        return not any(self.alpha)

    def __str__(self) -> str:
        return f"{self.src} -({','.join(map(str, self.alpha))})-> {self.dst}"


@dataclass
class DepGraph:
    m: int
    edges: list = field(default_factory=list)

    def adjacency(self) -> dict:
        adj = {v: set() for v in range(1, self.m + 1)}
        for e in self.edges:
            adj[e.src].add(e.dst)
        return adj


def dependency_graph(eps0, **zero_kw) -> DepGraph:
    """Edge K -alpha-> L whenever d eps0_L / d y^alpha_K is not provably zero."""
    eps0 = [as_expr(e) for e in eps0]
    m = len(eps0)
    if m < 1:
        raise ValueError("need at least one component")
    edges = []
    for L, e in enumerate(eps0, start=1):
        for a in e.free_atoms():
            if a.kind != "jet" or a.L == L:
                continue
            if a.L > m:
                raise ValueError(f"{a.text} outside m={m}")
            z = is_zero(e.diff(a), **zero_kw)
            if z is Zero.ZERO:
                continue
            edges.append(Edge(a.L, L, tuple(a.alpha), undecided=z is Zero.UNKNOWN))
    edges.sort(key=lambda e: (e.src, e.dst, sum(e.alpha), e.alpha))
    return DepGraph(m, edges)


def strongly_connected(m: int, adj: dict) -> dict:
    """Tarjan's algorithm; returns vertex -> component id."""
    index = {}
    low = {}
    on = set()
    stack = []
    comp = {}
    counter = [0, 0]

    def visit(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        for w in sorted(adj[v]):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            while True:
                w = stack.pop()
                on.discard(w)
                comp[w] = counter[1]
                if w == v:
                    break
            counter[1] += 1

    for v in range(1, m + 1):
        if v not in index:
            visit(v)
    return comp


def check_cycle_condition(g: DepGraph) -> CheckEntry:
    """Fails iff some directed cycle uses an edge with a nonzero label.

    An edge lies on a cycle exactly when both ends share a strongly
    connected component.
    """
    comp = strongly_connected(g.m, g.adjacency())
    bad = [e for e in g.edges if not e.zero_label and comp[e.src] == comp[e.dst]]
    undecided = any(e.undecided for e in g.edges)
    if bad:
        verdict = "unknown" if all(e.undecided for e in bad) else "fail"
    else:
        verdict = "pass"
    return CheckEntry(
        name="cycle_condition",
        verdict=verdict,
        residual=len(bad),
        witness=str(bad[0]) if bad else None,
        mode="sampled" if undecided else "symbolic",
        detail={"edges": [str(e) for e in g.edges], "offending": [str(e) for e in bad]},
    )


class InconsistencyError(ValueError):
    def __init__(self, i, L, L2, a, b):
        super().__init__(f"xi_{i} candidates disagree between L={L} ({a}) and L={L2} ({b})")
        self.i, self.L, self.L2 = i, L, L2


def _n_of(exprs) -> int:
    ns = {len(a.alpha) for e in exprs for a in e.jets()}
    if len(ns) > 1:
        raise ValueError("mixed multiindex lengths")
    return ns.pop() if ns else 1


def recover_xi(eps0, n: int | None = None, **zero_kw) -> list:
    """xi_i = -d eps0_L / d y^i_L, checked to agree across L."""
    eps0 = [as_expr(e) for e in eps0]
    n = n or _n_of(eps0)
    out = []
    for i in range(1, n + 1):
        unit = MultiIndex.unit(n, i)
        cands = [-(e.diff(u(L, unit))) for L, e in enumerate(eps0, start=1)]
        for L in range(2, len(cands) + 1):
            if is_zero(cands[0] - cands[L - 1], **zero_kw) is not Zero.ZERO:
                raise InconsistencyError(i, 1, L, cands[0], cands[L - 1])
        out.append(cands[0])
    return out


@dataclass
class Theorem2Result:
    entries: list
    field: LBField | None

    @property
    def verdict(self) -> str:
        from .report import combine

        return combine(e.verdict for e in self.entries)


def check_theorem2(phi, n: int | None = None, **zero_kw) -> Theorem2Result:
    """Admissibility of Phi_L as eps0 components of an LB field.

    (i)  d Phi_L / d y^i_L independent of L,
    (ii) d Phi_L / d y^alpha_L = 0 for |alpha| > 1,
    (iii) the cycle condition.
    On success the induced field is returned.
    """
    phi = [as_expr(e) for e in phi]
    m = len(phi)
    n = n or _n_of(phi)
    entries = []

    states, bad = [], []
    for i in range(1, n + 1):
        unit = MultiIndex.unit(n, i)
        ds = [e.diff(u(L, unit)) for L, e in enumerate(phi, start=1)]
        for L in range(2, m + 1):
            z = is_zero(ds[0] - ds[L - 1], **zero_kw)
            states.append(z)
            if z is not Zero.ZERO:
                bad.append({"i": i, "L": 1, "L2": L, "status": z.value})
    entries.append(_entry("theorem2_i_same_first_order", states, bad))

    states, bad = [], []
    for L, e in enumerate(phi, start=1):
        for a in e.jets():
            if a.L != L or a.order <= 1:
                continue
            z = is_zero(e.diff(a), **zero_kw)
            states.append(z)
            if z is not Zero.ZERO:
                bad.append({"L": L, "jet": a.text, "status": z.value})
    entries.append(_entry("theorem2_ii_no_own_higher_jets", states, bad))

    entries.append(check_cycle_condition(dependency_graph(phi, **zero_kw)))
    entries[-1].name = "theorem2_iii_cycle_condition"

    result = Theorem2Result(entries, None)
    if result.verdict == "pass":
        xi = [-(phi[0].diff(u(1, MultiIndex.unit(n, i))))for i in range(1, n + 1)]
        eta0 = []
        for L, e in enumerate(phi, start=1):
            for i in range(1, n + 1):
                e = e + u(L, MultiIndex.unit(n, i)) * xi[i - 1]
            eta0.append(e)
        result.field = LBField(n, m, xi, eta0)
    return result


def _entry(name, states, bad) -> CheckEntry:
    from .report import verdict_from_zero

    return CheckEntry(
        name=name,
        verdict=verdict_from_zero(states) if states else "pass",
        residual=len(bad),
        witness=bad[0] if bad else None,
        mode="sampled" if any(s is Zero.UNKNOWN for s in states) else "symbolic",
        detail=bad,
    )


# --------------------------------------------------------------------------
# condition F probe

@dataclass
class FootprintReport:
    coordinate: str
    kmax: int
    footprints: list
    max_order: list
    stabilized: bool
    budget_exceeded: bool = False

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "kmax": self.kmax,
            "footprints": self.footprints,
            "max_order": self.max_order,
            "stabilized": self.stabilized,
            "budget_exceeded": self.budget_exceeded,
        }


def _size(e: Expr) -> int:
    r = e.rat
    return len(r.num) + sum(len(f.poly) for f, _ in r.den)


def footprint_probe(f: LBField, g, kmax: int, budget: int = 20000) -> FootprintReport:
    """Record the variables of X(g), X^2(g), ..., X^kmax(g).

    X acts on an expression through xi_i and the prolonged components of the
    jets it actually contains, prolonging further on demand.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    g = as_expr(g)
    order = max(f.order, g.jet_order(), 0) + 1
    p = prolong(f, order)
    foot, orders = [], []
    cur = g
    exceeded = False
    for _ in range(kmax):
        need = cur.jet_order()
        if need > p.order:
            p = prolong(f, need)
        cur = apply_vector_field(cur, {c: v for c, v in p.vector_components().items()
                                       if c.free_ids & cur.free_ids})
        foot.append([a.text for a in cur.free_atoms()])
        orders.append(cur.jet_order())
        if _size(cur) > budget:
            exceeded = True
            break
    stabilized = len(foot) >= 2 and foot[-1] == foot[-2] and not exceeded
    return FootprintReport(str(g), kmax, foot, orders, stabilized, exceeded)
