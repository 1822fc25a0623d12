"""Pure-Python/numpy interpreter for compiled tapes.

Batch evaluation vectorizes each instruction over all points; RK4 runs the
tape on a single state vector.
"""

from __future__ import annotations

import math

import numpy as np

from ._tape import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_LN,
    OP_MUL,
    OP_NEG,
    OP_POWI,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
)

_NP_FUNCS = {OP_SIN: np.sin, OP_COS: np.cos, OP_EXP: np.exp, OP_LN: np.log, OP_SQRT: np.sqrt}


def eval_batch(op, dst, a, b, consts, outputs, nregs, X):
    X = np.asarray(X, dtype=np.float64)
    npts, nv = X.shape
    regs = [None] * nregs
    for i in range(nv):
        regs[i] = X[:, i]
    with np.errstate(all="ignore"):
        for k in range(len(op)):
            o = op[k]
            if o == OP_CONST:
                regs[dst[k]] = np.full(npts, consts[b[k]])
            elif o == OP_ADD:
                regs[dst[k]] = regs[a[k]] + regs[b[k]]
            elif o == OP_SUB:
                regs[dst[k]] = regs[a[k]] - regs[b[k]]
            elif o == OP_MUL:
                regs[dst[k]] = regs[a[k]] * regs[b[k]]
            elif o == OP_DIV:
                regs[dst[k]] = regs[a[k]] / regs[b[k]]
            elif o == OP_POWI:
                regs[dst[k]] = regs[a[k]] ** int(b[k])
            elif o == OP_NEG:
                regs[dst[k]] = -regs[a[k]]
            else:
                regs[dst[k]] = _NP_FUNCS[o](regs[a[k]])
    out = np.empty((npts, len(outputs)))
    for j, r in enumerate(outputs):
        out[:, j] = regs[r]
    return out


def _scalar_funcs():
    def safe(f):
        def g(v):
            try:
                return f(v)
            except (ValueError, OverflowError):
                return math.nan
        return g

    return {OP_SIN: math.sin, OP_COS: math.cos, OP_EXP: safe(math.exp),
            OP_LN: safe(math.log), OP_SQRT: safe(math.sqrt)}


_SCALAR = _scalar_funcs()


def _eval_point(code, consts, outputs, nregs, z):
    regs = [0.0] * nregs
    regs[: len(z)] = z
    for o, d, x, y in code:
        if o == OP_CONST:
            regs[d] = consts[y]
        elif o == OP_ADD:
            regs[d] = regs[x] + regs[y]
        elif o == OP_SUB:
            regs[d] = regs[x] - regs[y]
        elif o == OP_MUL:
            regs[d] = regs[x] * regs[y]
        elif o == OP_DIV:
            q = regs[y]
            regs[d] = regs[x] / q if q != 0.0 else math.nan
        elif o == OP_POWI:
            try:
                regs[d] = regs[x] ** y
            except (OverflowError, ZeroDivisionError):
                regs[d] = math.nan
        elif o == OP_NEG:
            regs[d] = -regs[x]
        else:
            regs[d] = _SCALAR[o](regs[x])
    return [regs[r] for r in outputs]


def rk4(op, dst, a, b, consts, outputs, nregs, z0, t, h):
    """Classical RK4 for z' = F(z), F given by the tape, from z0 over time t."""
    code = list(zip(op.tolist(), dst.tolist(), a.tolist(), b.tolist()))
    consts = consts.tolist()
    outputs = outputs.tolist()
    z = [float(v) for v in z0]
    n = len(z)
    if t == 0.0:
        return np.array(z)
    h = abs(h)
    steps = int(math.ceil(abs(t) / h - 1e-12))
    sign = 1.0 if t > 0 else -1.0
    done = 0.0
    for s in range(steps):
        dt = min(h, abs(t) - done) * sign
        k1 = _eval_point(code, consts, outputs, nregs, z)
        k2 = _eval_point(code, consts, outputs, nregs, [z[i] + 0.5 * dt * k1[i] for i in range(n)])
        k3 = _eval_point(code, consts, outputs, nregs, [z[i] + 0.5 * dt * k2[i] for i in range(n)])
        k4 = _eval_point(code, consts, outputs, nregs, [z[i] + dt * k3[i] for i in range(n)])
        z = [z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(n)]
        if not all(math.isfinite(v) for v in z):
            return np.array(z)
        done += abs(dt)
    return np.array(z)
