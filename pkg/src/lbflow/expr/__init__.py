"""Symbolic expression engine: exact rational functions with opaque
elementary functions, as immutable normal-form trees."""

from . import atoms
from .ops import DEFAULT_SEED, Zero, diff, evaluate, evaluate_ids, is_zero, substitute
from .parse import ParseError, Signature, parse
from .tree import (
    Expr,
    SingularityError,
    UnboundVariableError,
    apply_func,
    as_expr,
    const,
    param,
    u,
    var,
    x,
)


def sin(e):
    return apply_func("sin", e)


def cos(e):
    return apply_func("cos", e)


def exp(e):
    return apply_func("exp", e)


def ln(e):
    return apply_func("ln", e)


def sqrt(e):
    return apply_func("sqrt", e)


__all__ = [
    "DEFAULT_SEED",
    "Expr",
    "ParseError",
    "Signature",
    "SingularityError",
    "UnboundVariableError",
    "Zero",
    "apply_func",
    "as_expr",
    "atoms",
    "const",
    "cos",
    "diff",
    "evaluate",
    "evaluate_ids",
    "exp",
    "is_zero",
    "ln",
    "param",
    "parse",
    "sin",
    "sqrt",
    "substitute",
    "u",
    "var",
    "x",
]
