"""Numeric kernels for compiled expression tapes.

The Cython extension ``_ckernel`` is used when it was built; otherwise the
numpy interpreter in ``_pykernel`` takes over.  Set ``LBFLOW_PURE=1`` to force
the fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..expr import SingularityError
from . import _pykernel
from ._tape import Tape, compile_exprs

BACKEND = "python"
_impl = _pykernel
if os.environ.get("LBFLOW_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernel


def backend(name=None):
    """Kernel module for "cython", "python" or None (the default backend)."""
    if name is None:
        return _impl
    if not isinstance(name, str):
        return name
    if name == "python":
        return _pykernel
    if name == "cython":
        from . import _ckernel

        return _ckernel
    raise ValueError(f"unknown backend {name!r}")


def _args(tape: Tape):
    return (tape.op, tape.dst, tape.a, tape.b, tape.consts, tape.outputs, tape.nregs)


def eval_batch(tape: Tape, X, impl=None, check: bool = True) -> np.ndarray:
    """Evaluate the tape at each row of X (npts x nvars)."""
    impl = backend(impl)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != tape.nvars:
        raise ValueError(f"expected {tape.nvars} columns, got {X.shape[1]}")
    out = impl.eval_batch(*_args(tape), X)
    if check and not np.all(np.isfinite(out)):
        raise SingularityError("non-finite value in tape evaluation")
    return out


def eval_point(tape: Tape, z, impl=None) -> np.ndarray:
    return eval_batch(tape, np.asarray(z, dtype=np.float64)[None, :], impl)[0]


def rk4(tape: Tape, z0, t: float, h: float, impl=None) -> np.ndarray:
    """Integrate z' = F(z) with fixed-step RK4; the last step is shortened."""
    impl = backend(impl)
    if tape.nout != tape.nvars:
        raise ValueError("RK4 needs as many outputs as state variables")
    if h <= 0 or not math.isfinite(h):
        raise ValueError("step must be positive")
    z = impl.rk4(*_args(tape), np.asarray(z0, dtype=np.float64), float(t), float(h))
    if not np.all(np.isfinite(z)):
        raise SingularityError("trajectory left the domain of the field")
    return np.asarray(z)


__all__ = ["BACKEND", "backend", "Tape", "compile_exprs", "eval_batch", "eval_point", "rk4"]
