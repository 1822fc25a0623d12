import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lbflow import kernels
from lbflow.expr import SingularityError, evaluate, parse, u, x
from lbflow.kernels import compile_exprs

from .strategies import rationals

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
VARS = [x(1), u(1, (0,)), u(2, (0,)), u(1, (1,)), u(2, (1,))]


@pytest.mark.parametrize("impl", BACKENDS)
def test_constant_field_is_exact(impl):
    tape = compile_exprs([1], [x(1)])
    assert kernels.rk4(tape, [0.0], 1.0, 1e-3, impl)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_exponential(impl):
    y = u(1, (0,))
    tape = compile_exprs([y], [y])
    assert abs(kernels.rk4(tape, [1.0], 1.0, 1e-3, impl)[0] - math.e) < 1e-8
    assert abs(kernels.rk4(tape, [1.0], -1.0, 1e-3, impl)[0] - 1 / math.e) < 1e-8


@pytest.mark.parametrize("impl", BACKENDS)
def test_partial_last_step(impl):
    tape = compile_exprs([1], [x(1)])
    assert kernels.rk4(tape, [0.0], 0.3337, 0.1, impl)[0] == pytest.approx(0.3337, abs=1e-14)


@pytest.mark.parametrize("impl", BACKENDS)
def test_singularity_raises(impl):
    y = u(1, (0,))
    tape = compile_exprs([1 / y], [x(1), y][1:])
    with pytest.raises(SingularityError):
        kernels.eval_batch(tape, [[0.0]], impl)
    blow = compile_exprs([y * y], [y])
    with pytest.raises(SingularityError):
        kernels.rk4(blow, [1.0], 2.0, 1e-2, impl)


def test_function_atoms():
    e = parse("sin(x1)*exp(u1[0]) + ln(u2[1]) - sqrt(u1[1])", n=1, m=2)
    tape = compile_exprs([e], VARS)
    pt = [0.3, 0.2, 0.0, 0.5, 1.5]
    want = math.sin(0.3) * math.exp(0.2) + math.log(1.5) - math.sqrt(0.5)
    for impl in BACKENDS:
        assert kernels.eval_point(tape, pt, impl)[0] == pytest.approx(want, rel=1e-14)


@settings(max_examples=30)
@given(rationals(), st.lists(st.floats(-1, 1), min_size=5, max_size=5))
def test_backends_agree_with_exact_evaluation(e, pt):
    e1 = parse(str(e).replace("u1[2]", "u1[0]").replace("u2[2]", "u2[0]"), n=1, m=2)
    tape = compile_exprs([e1], VARS)
    env = dict(zip(["x1", "u1[0]", "u2[0]", "u1[1]", "u2[1]"], pt))
    want = float(evaluate(e1, env))
    for impl in BACKENDS:
        got = kernels.eval_point(tape, pt, impl)[0]
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_batch_matches_pointwise():
    e = parse("(u1[1]^2 - x1)/(1 + u2[1]^2)", n=1, m=2)
    tape = compile_exprs([e, e * e], VARS)
    X = np.random.default_rng(0).uniform(-1, 1, (50, 5))
    for impl in BACKENDS:
        B = kernels.eval_batch(tape, X, impl)
        for i in range(0, 50, 7):
            assert np.allclose(B[i], kernels.eval_point(tape, X[i], impl))


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_rk4_backends_agree():
    y1, y2 = u(1, (0,)), u(2, (0,))
    tape = compile_exprs([y2, -y1], [y1, y2])
    a = kernels.rk4(tape, [1.0, 0.0], 2.0, 1e-3, "python")
    b = kernels.rk4(tape, [1.0, 0.0], 2.0, 1e-3, "cython")
    assert np.max(np.abs(a - b)) < 1e-13
    assert abs(a[0] - math.cos(2.0)) < 1e-10
