# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape interpreter: batch evaluation and RK4 stepping."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, log, sqrt, ceil, fabs, NAN, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    OP_CONST = 0
    OP_ADD = 1
    OP_SUB = 2
    OP_MUL = 3
    OP_DIV = 4
    OP_POWI = 5
    OP_NEG = 6
    OP_SIN = 7
    OP_COS = 8
    OP_EXP = 9
    OP_LN = 10
    OP_SQRT = 11


cdef inline double _powi(double x, int k) nogil:
    cdef double r = 1.0
    cdef int neg = k < 0
    if neg:
        k = -k
    while k:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    if neg:
        return 1.0 / r
    return r


cdef void _run(const int[:] op, const int[:] dst, const int[:] a, const int[:] b,
               const double[:] consts, double* regs) nogil:
    cdef Py_ssize_t k, n = op.shape[0]
    cdef int o
    cdef double v
    for k in range(n):
        o = op[k]
        if o == OP_CONST:
            regs[dst[k]] = consts[b[k]]
        elif o == OP_ADD:
            regs[dst[k]] = regs[a[k]] + regs[b[k]]
        elif o == OP_SUB:
            regs[dst[k]] = regs[a[k]] - regs[b[k]]
        elif o == OP_MUL:
            regs[dst[k]] = regs[a[k]] * regs[b[k]]
        elif o == OP_DIV:
            v = regs[b[k]]
            regs[dst[k]] = regs[a[k]] / v if v != 0.0 else NAN
        elif o == OP_POWI:
            regs[dst[k]] = _powi(regs[a[k]], b[k])
        elif o == OP_NEG:
            regs[dst[k]] = -regs[a[k]]
        elif o == OP_SIN:
            regs[dst[k]] = sin(regs[a[k]])
        elif o == OP_COS:
            regs[dst[k]] = cos(regs[a[k]])
        elif o == OP_EXP:
            regs[dst[k]] = exp(regs[a[k]])
        elif o == OP_LN:
            v = regs[a[k]]
            regs[dst[k]] = log(v) if v > 0.0 else NAN
        elif o == OP_SQRT:
            v = regs[a[k]]
            regs[dst[k]] = sqrt(v) if v >= 0.0 else NAN


def eval_batch(const int[:] op, const int[:] dst, const int[:] a, const int[:] b,
               const double[:] consts, const int[:] outputs, int nregs, X):
    cdef double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t npts = Xv.shape[0], nv = Xv.shape[1], nout = outputs.shape[0]
    out = np.empty((npts, nout), dtype=np.float64)
    cdef double[:, :] ov = out
    cdef double* regs = <double*> malloc(max(nregs, 1) * sizeof(double))
    cdef Py_ssize_t p, i
    if regs == NULL:
        raise MemoryError()
    try:
        with nogil:
            for p in range(npts):
                for i in range(nv):
                    regs[i] = Xv[p, i]
                _run(op, dst, a, b, consts, regs)
                for i in range(nout):
                    ov[p, i] = regs[outputs[i]]
    finally:
        free(regs)
    return out


def rk4(const int[:] op, const int[:] dst, const int[:] a, const int[:] b,
        const double[:] consts, const int[:] outputs, int nregs, z0, double t, double h):
    cdef Py_ssize_t n = outputs.shape[0], i, s, steps
    z_arr = np.array(z0, dtype=np.float64)
    cdef double[:] z = z_arr
    if t == 0.0:
        return z_arr
    h = fabs(h)
    steps = <Py_ssize_t> ceil(fabs(t) / h - 1e-12)
    cdef double sign = 1.0 if t > 0 else -1.0
    cdef double done = 0.0, dt
    cdef double* regs = <double*> malloc(max(nregs, 1) * sizeof(double))
    cdef double* k1 = <double*> malloc(4 * n * sizeof(double))
    cdef double* k2 = k1 + n
    cdef double* k3 = k1 + 2 * n
    cdef double* k4 = k1 + 3 * n
    cdef bint ok = True
    if regs == NULL or k1 == NULL:
        raise MemoryError()
    try:
        with nogil:
            for s in range(steps):
                dt = fabs(t) - done
                if dt > h:
                    dt = h
                dt = dt * sign
                for i in range(n):
                    regs[i] = z[i]
                _run(op, dst, a, b, consts, regs)
                for i in range(n):
                    k1[i] = regs[outputs[i]]
                for i in range(n):
                    regs[i] = z[i] + 0.5 * dt * k1[i]
                _run(op, dst, a, b, consts, regs)
                for i in range(n):
                    k2[i] = regs[outputs[i]]
                for i in range(n):
                    regs[i] = z[i] + 0.5 * dt * k2[i]
                _run(op, dst, a, b, consts, regs)
                for i in range(n):
                    k3[i] = regs[outputs[i]]
                for i in range(n):
                    regs[i] = z[i] + dt * k3[i]
                _run(op, dst, a, b, consts, regs)
                for i in range(n):
                    k4[i] = regs[outputs[i]]
                for i in range(n):
                    z[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                    if not isfinite(z[i]):
                        ok = False
                if not ok:
                    break
                done += fabs(dt)
    finally:
        free(regs)
        free(k1)
    return z_arr
