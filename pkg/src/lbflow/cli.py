"""Command line interface: check | prolong | truncate | flow | construct | verify.

Exit codes: 0 pass, 1 fail, 2 unknown/inconclusive, 3 bad input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import __version__
from .classifier import check_theorem2
from .expo2 import UnsupportedSignature, check_supported, expo_check
from .expr import ParseError, SingularityError, evaluate, parse, substitute
from .field import LBField, SignatureError, commutator_defect, epsilon0, prolong, verify_lb_identity
from .flow import (
    T,
    FlowError,
    closed_form_flow,
    generator_check,
    germ_flow,
    identity_at_zero,
    is_restricted,
    lie_series_flow,
    rk4_flow,
    rk4_vs_closed,
    starred_invariance,
    verify_eq2,
    verify_group_law,
)
from .foliation import (
    FoliationError,
    FoliationSpec,
    affine_profile,
    build_general,
    build_radial,
    ode_entry,
    parse_l,
    radial_spec,
)
from .jet import coordinate_list
from .report import CheckEntry, build_document, combine, dumps
from .specfile import SpecError, dumps_field, load
from .truncation import NonPolynomialError, PreconditionError, truncate

EXIT = {"pass": 0, "fail": 1, "unknown": 2, "skipped": 2}
EXIT_INPUT = 3

EXPO_NAMES = ("theorem6_i", "theorem6_ii", "m_squared_zero", "m_nonzero_at_point", "module_closure")


class InputError(Exception):
    pass


def _emit(args, entries, verdict, extra=None, text=""):
    doc = build_document(entries, tool_version=__version__, input_text=text, seed=args.seed,
                         verdict=verdict, extra=extra)
    if args.json:
        out = dumps(doc)
        if args.json == "-":
            sys.stdout.write(out)
        else:
            with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(out)
    return doc


def _print_entries(entries):
    for e in entries:
        res = "" if e.residual is None or isinstance(e.residual, (list, dict)) else f" residual={e.residual}"
        tag = "" if e.gating else " (info)"
        print(f"{e.name}: {e.verdict} [{e.mode}]{res}{tag}")
        if e.verdict == "fail" and e.witness is not None:
            print(f"  witness: {e.witness}")


def _point(text, count=None):
    try:
        vals = [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad point {text!r}") from exc
    if count is not None and len(vals) != count:
        raise InputError(f"point needs {count} coordinates, got {len(vals)}")
    return vals


# --------------------------------------------------------------------------
# check


def check_entries(spec, samples=100, seed=42, tol=1e-9, point=None):
    """(entries, verdict, extra) for a parsed spec."""
    extra = {"kind": spec.kind}
    if spec.kind == "phi":
        res = check_theorem2(spec.phi, spec.n)
        if res.field is not None:
            extra["induced_field"] = {"xi": [str(e) for e in res.field.xi],
                                      "eta0": [str(e) for e in res.field.eta0]}
        return res.entries, res.verdict, extra

    f = spec.field()
    entries = []
    lb = verify_lb_identity(prolong(f, max(f.order, 1) + 1))
    entries.append(lb)
    t2 = check_theorem2(epsilon0(f), f.n)
    for e in t2.entries:
        e.gating = False
    entries += t2.entries
    try:
        check_supported(f)
        supported = True
    except UnsupportedSignature as exc:
        supported = False
        entries += [CheckEntry(n, "skipped", detail=str(exc)) for n in EXPO_NAMES]
    if supported:
        rep = expo_check(f, point, samples, seed, tol)
        entries += rep.entries
        extra["exponentiability"] = rep.verdict
        extra["matrices"] = rep.matrices.as_dict()
        if rep.A is not None:
            extra["closure_A"] = rep.A

    cert = None
    if not supported and f.n == 1:
        cert = constructive_flow_entry(f)
        entries.append(cert)

    if lb.verdict != "pass":
        verdict = lb.verdict
    elif t2.verdict == "pass":
        verdict = "pass"
    elif supported:
        verdict = rep.exit_verdict
    elif cert is not None and cert.verdict == "pass":
        verdict = "pass"
    else:
        verdict = "unknown"
    return entries, verdict, extra


def constructive_flow_entry(f: LBField, max_terms: int = 4) -> CheckEntry:
    """A terminating Lie series whose lift satisfies the group law exactly
    certifies exponentiability."""
    try:
        flow = lie_series_flow(f, max_terms)
    except FlowError as exc:
        return CheckEntry("constructive_flow", "unknown", detail=str(exc))
    order = max(f.order, 1)
    checks = [identity_at_zero(flow, order), verify_eq2(flow, order),
              verify_group_law(flow, order=order, mode="symbolic")]
    verdict = combine(e.verdict for e in checks)
    return CheckEntry("constructive_flow", verdict, mode="symbolic",
                      witness={"Xi": str(flow.Xi), "H0": [str(flow.component(L, 0)) for L in range(1, f.m + 1)]},
                      detail={e.name: e.verdict for e in checks})


def cmd_check(args) -> int:
    spec = load(args.spec)
    pt = _point(args.point, 5) if args.point else None
    entries, verdict, extra = check_entries(spec, args.samples, args.seed, args.tol, pt)
    if spec.name:
        extra["name"] = spec.name
    _emit(args, entries, verdict, extra, spec.text)
    _print_entries(entries)
    if "exponentiability" in extra:
        print(f"exponentiability: {extra['exponentiability']}")
    print(f"verdict: {verdict}")
    return EXIT[verdict]


# --------------------------------------------------------------------------
# prolong / truncate


def cmd_prolong(args) -> int:
    spec = load(args.spec)
    if spec.kind != "field":
        raise InputError("prolong needs xi/eta0 components")
    f = spec.field()
    p = prolong(f, args.order)
    rows = []
    for i, xi in enumerate(f.xi, start=1):
        print(f"xi_{i} = {xi}")
        rows.append({"coord": f"x{i}", "xi": str(xi)})
    for key in p.pairs():
        eta, eps = p.eta_of(*key), p.eps_of(*key)
        c = key.coord()
        print(f"eta {c} = {eta}")
        print(f"eps {c} = {eps}")
        rows.append({"coord": str(c), "eta": str(eta), "eps": str(eps)})
    entries = [verify_lb_identity(p)] + [commutator_defect(f, p, i) for i in range(1, f.n + 1)]
    verdict = combine(e.verdict for e in entries)
    _emit(args, entries, verdict, {"order": args.order, "components": rows}, spec.text)
    _print_entries(entries)
    return EXIT[verdict]


def cmd_truncate(args) -> int:
    spec = load(args.spec)
    if spec.kind != "field":
        raise InputError("truncate needs xi/eta0 components")
    f = spec.field()
    X, Ys, s = truncate(f, args.k)
    print(f"k = {s.k}")
    print(f"X = {X}")
    for ell, (Y, mono) in enumerate(zip(Ys, s.monomials), start=1):
        print(f"Y_{ell} [{mono}] = {Y}")
    extra = {"k": s.k, "X": str(X), "Y": [str(Y) for Y in Ys], "monomials": [str(mm) for mm in s.monomials]}
    _emit(args, [], "pass", extra, spec.text)
    return 0


# --------------------------------------------------------------------------
# flow


def symbolic_flow(f: LBField):
    if f.n != 1:
        raise InputError("symbolic flows need n = 1")
    if is_restricted(f):
        return closed_form_flow(f)
    return lie_series_flow(f)


def cmd_flow(args) -> int:
    spec = load(args.spec)
    if spec.kind != "field":
        raise InputError("flow needs xi/eta0 components")
    f = spec.field()
    t = float(Fraction(args.t))
    entries = []
    extra = {"t": t, "mode": args.mode}
    if args.point:
        if args.mode == "rk4":
            X, _, _ = truncate(f, args.order)
            pt = _point(args.point, len(X.coords))
            out = rk4_flow(X, [float(v) for v in pt], t, args.h)
            extra["coords"] = [str(c) for c in X.coords]
            extra["point"] = [float(v) for v in out]
        else:
            out = _closed_point(f, args, t)
        print("(" + ", ".join(_fmt(v) for v in extra.get("point", out)) + ")")
        extra.setdefault("point", [float(v) for v in out])

    flow = None
    try:
        flow = symbolic_flow(f)
    except (FlowError, InputError) as exc:
        extra["flow_note"] = str(exc)
    if flow is not None:
        if flow.note:
            print(f"note: {flow.note}")
            extra["validity"] = flow.note
        entries.append(verify_eq2(flow, args.order + 1))
        entries.append(verify_group_law(flow, args.samples, order=args.order, seed=args.seed,
                                        mode="numeric", tol=args.tol))
        if args.mode == "rk4" and is_restricted(f):
            entries.append(rk4_vs_closed(f, min(args.samples, 20), args.seed, h=args.h))
        if args.germ:
            entries.append(_germ(args, flow, t))
    verdict = combine(e.verdict for e in entries) if entries else "unknown"
    _emit(args, entries, verdict, extra, spec.text)
    _print_entries(entries)
    return EXIT[verdict]


def _fmt(v) -> str:
    v = float(v)
    return repr(0.0 if v == 0 else round(v, 12))


def _closed_point(f: LBField, args, t: float):
    """Phi^(1)_t of the restricted family: (x + t xi, y0 + t eta0, y1)."""
    if not is_restricted(f):
        raise InputError("--mode closed needs xi, eta0 functions of y^1 only (n=1, m=2)")
    if args.order != 1:
        raise InputError("--mode closed evaluates Phi^(1); use --order 1")
    pt = _point(args.point, 5)
    flow = closed_form_flow(f)
    coords = coordinate_list(1, 2, 1)
    vals = dict(zip(coords, pt))
    tq = Fraction(args.t)
    out = []
    for c, comp in zip(coords[:3], [flow.Xi, flow.component(1, 0), flow.component(2, 0)]):
        try:
            out.append(evaluate(substitute(comp, {T: tq}), vals))
        except SingularityError as exc:
            raise InputError(f"flow singular at the point: {exc}") from exc
    return out + pt[3:]


def _germ(args, flow, t):
    fs = [parse(s.strip(), n=1, m=flow.m) for s in args.germ.split(";")]
    a, b = (float(Fraction(s)) for s in args.window.split(","))
    res = germ_flow(flow, fs, (a, b), t, samples=args.germ_samples)
    if args.csv:
        data = res.to_csv()
        if args.csv == "-":
            sys.stdout.write(data)
        else:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
    ok = res.invertible and bool(res.covered.all()) and res.derivative_error <= 1e-6
    return CheckEntry("germ_flow", "pass" if ok else "fail", residual=res.derivative_error,
                      mode="sampled", detail={"notes": res.notes, "invertible": res.invertible})


# --------------------------------------------------------------------------
# construct / verify


def build_family(args):
    """(field, entries) for the construct parameters."""
    fam = args.family
    if fam == "radial":
        f = build_radial(args.F1, args.g)
        spec = radial_spec(args.F1, args.g)
        from .foliation import LAM, dl

        f1 = dl(spec.F1)
        return f, [ode_entry(spec, f1, LAM * f1 - spec.F1)]
    if fam == "affine":
        spec, f1, f2 = affine_profile(args.gamma, args.F1, args.g, unintegrated=args.unintegrated)
        from .foliation import _field

        name = "affine (unintegrated g)" if args.unintegrated else "affine"
        return _field(spec, f1, f2, name), [ode_entry(spec, f1, f2)]
    if fam == "general":
        if not (args.lam and args.slope and args.q0):
            raise InputError("--family general needs --lam, --slope and --q0")
        lam = parse(args.lam, n=1, m=2)
        spec = FoliationSpec("general", lam, parse_l(args.slope), parse_l(args.q0),
                             parse_l(args.F1), parse_l(args.g))
        return build_general(spec), []
    raise InputError(f"unknown family {fam}")


def cmd_construct(args) -> int:
    f, entries = build_family(args)
    prov = f"construct --family {args.family} --F1 {args.F1!r} --g {args.g!r}"
    if args.family == "affine":
        prov += f" --gamma {args.gamma}"
        if args.unintegrated:
            prov += " --unintegrated"
    sys.stdout.write(dumps_field(f, {"provenance": prov}))
    verdict = combine(e.verdict for e in entries) if entries else "pass"
    _emit(args, entries, verdict, {"field": {"xi": [str(e) for e in f.xi], "eta0": [str(e) for e in f.eta0]}},
          prov)
    return EXIT[verdict]


def verify_entries(f: LBField, order=3, samples=100, seed=42, tol=1e-9):
    p = prolong(f, order)
    entries = [verify_lb_identity(p)] + [commutator_defect(f, p, i) for i in range(1, f.n + 1)]
    try:
        flow = symbolic_flow(f)
    except (FlowError, InputError) as exc:
        entries.append(CheckEntry("flow", "skipped", detail=str(exc)))
        return entries
    entries.append(identity_at_zero(flow, order))
    entries.append(generator_check(flow, order))
    entries.append(verify_eq2(flow, order))
    entries.append(verify_group_law(flow, samples, order=min(order, 2), seed=seed, mode="auto", tol=tol))
    if is_restricted(f):
        entries.append(starred_invariance(f, flow, samples, seed, tol))
        entries.append(rk4_vs_closed(f, min(samples, 20), seed))
    return entries


def cmd_verify(args) -> int:
    spec = load(args.spec)
    if spec.kind != "field":
        raise InputError("verify needs xi/eta0 components")
    entries = verify_entries(spec.field(), args.order, args.samples, args.seed, args.tol)
    verdict = combine(e.verdict for e in entries if e.gating)
    _emit(args, entries, verdict, {}, spec.text)
    _print_entries(entries)
    print(f"verdict: {verdict}")
    return EXIT[verdict]


# --------------------------------------------------------------------------


def _globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(42), help="RNG seed (default 42)")
    p.add_argument("--samples", type=int, default=d(100), help="sample points (default 100)")
    p.add_argument("--tol", type=float, default=d(1e-9), help="numeric tolerance (default 1e-9)")
    p.add_argument("--json", default=d(None), metavar="PATH", help="write the JSON report here ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lbflow", description="Lie-Baecklund field toolkit")
    ap.add_argument("--version", action="version", version=f"lbflow {__version__}")
    _globals(ap, False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        _globals(p, True)
        return p

    p = add("check", "classify a field or eps0 candidates")
    p.add_argument("spec")
    p.add_argument("--point", help="x,y0_1,y0_2,y1_1,y1_2 for the M != 0 check")
    p.set_defaults(func=cmd_check)

    p = add("prolong", "print prolonged eta and eps components")
    p.add_argument("spec")
    p.add_argument("--order", type=int, default=2, help="jet order to prolong to (default 2)")
    p.set_defaults(func=cmd_prolong)

    p = add("truncate", "build X^(k) and the auxiliary fields Y^(k)")
    p.add_argument("spec")
    p.add_argument("--k", type=int, default=None, help="truncation order (default: the dependency order)")
    p.set_defaults(func=cmd_truncate)

    p = add("flow", "evaluate and verify the flow of a field")
    p.add_argument("spec")
    p.add_argument("--t", default="0.1", help="flow time (default 0.1)")
    p.add_argument("--point", help="comma separated coordinates x, y0, y1, ...")
    p.add_argument("--mode", choices=("closed", "rk4"), default="closed",
                   help="closed-form map or RK4 on X^(1) (default closed)")
    p.add_argument("--order", type=int, default=1, help="jet order of the verified components (default 1)")
    p.add_argument("--h", type=float, default=1e-3, help="RK4 step (default 1e-3)")
    p.add_argument("--germ", help="component functions of x1 separated by ';'")
    p.add_argument("--window", default="0,1", help="germ window a,b (default 0,1)")
    p.add_argument("--germ-samples", type=int, default=101, help="grid points in the window (default 101)")
    p.add_argument("--csv", help="CSV path for the germ samples ('-' for stdout)")
    p.set_defaults(func=cmd_flow)

    p = add("construct", "emit a spec for a foliation family")
    p.add_argument("--family", choices=("radial", "affine", "general"), required=True)
    p.add_argument("--F1", default="0", help="primitive of the eta0_1 profile, in l")
    p.add_argument("--g", default="0", help="xi profile, in l")
    p.add_argument("--gamma", default="1", help="affine: rational constant (default 1)")
    p.add_argument("--lam", help="leaf coordinate in u1[1], u2[1] (general)")
    p.add_argument("--slope", help="m(l) (general)")
    p.add_argument("--q0", help="q0(l) (general)")
    p.add_argument("--unintegrated", action="store_true", help="affine: use g in place of G")
    p.set_defaults(func=cmd_construct)

    p = add("verify", "flow and prolongation identities")
    p.add_argument("spec")
    p.add_argument("--order", type=int, default=3, help="highest jet order checked (default 3)")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ParseError, SignatureError, InputError, FoliationError, FlowError,
            PreconditionError, NonPolynomialError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
