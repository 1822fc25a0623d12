"""Compare the Cython and numpy kernels on tape evaluation and RK4.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 20000]
"""

import argparse
import time

import numpy as np

from lbflow import kernels
from lbflow.foliation import build_affine
from lbflow.truncation import truncate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--h", type=float, default=1e-3)
    args = ap.parse_args(argv)

    xk, _, _ = truncate(build_affine(1, "l^2/2", "l"), 1)
    tape = kernels.compile_exprs([xk.coefficient(c) for c in xk.coords], list(xk.coords))
    rng = np.random.default_rng(42)
    X = rng.uniform(-1, 1, size=(args.points, tape.nvars))
    X[:, 3] = rng.uniform(0.5, 2, size=args.points)  # keep 1 + y1_1 away from zero
    z0 = np.array([0.0, 0.0, 0.0, 1.0, 2.0])

    try:
        kernels.backend("cython")
        names = ["python", "cython"]
    except ImportError:
        print("compiled kernel not built; timing the numpy fallback only")
        names = ["python"]

    ref = kernels.eval_batch(tape, X, impl="python")
    rows = []
    for name in names:
        out = kernels.eval_batch(tape, X, impl=name)
        assert np.allclose(out, ref, rtol=1e-13, atol=1e-13)
        ev = best_of(lambda: kernels.eval_batch(tape, X, impl=name), args.repeat)
        small = best_of(lambda: [kernels.eval_batch(tape, X[:100], impl=name) for _ in range(100)], args.repeat) / 100
        rk = best_of(lambda: kernels.rk4(tape, z0, args.t, args.h, impl=name), args.repeat)
        rows.append((name, ev, small, rk))

    print(f"tape: {len(tape)} instructions, {tape.nvars} vars; eval {args.points} points; "
          f"rk4 t={args.t} h={args.h}")
    print(f"{'backend':8s} {'eval_batch [ms]':>16s} {'eval 100 pts [us]':>18s} {'rk4 [ms]':>10s}")
    for name, ev, small, rk in rows:
        print(f"{name:8s} {ev * 1e3:16.3f} {small * 1e6:18.1f} {rk * 1e3:10.3f}")
    if len(rows) == 2:
        a, b = rows
        print(f"{'speedup':8s} {a[1] / b[1]:15.1f}x {a[2] / b[2]:17.1f}x {a[3] / b[3]:9.1f}x")


if __name__ == "__main__":
    main()
