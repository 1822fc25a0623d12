"""Interned indeterminates shared by the polynomial layer and the tree layer.

An atom is one of

* ``x``     base variable ``x_i``
* ``jet``   jet coordinate ``y^alpha_L``
* ``param`` named scalar parameter (``t``, ``s``, ``l``)
* ``func``  opaque elementary function applied to a normal-form argument

Atoms are hash-consed: building the same atom twice returns the same object,
so polynomial monomials can key on the integer ``id``.  The ``key`` tuple is
the structural sort key used for every user-visible ordering; ids only depend
on creation order and never leak into output.
"""

from __future__ import annotations

import threading

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")

_REGISTRY: list["Atom"] = []
_BY_KEY: dict[tuple, "Atom"] = {}
_LOCK = threading.Lock()


class Atom:
    __slots__ = ("id", "kind", "key", "index", "L", "alpha", "name", "arg", "free", "text")

    def __repr__(self) -> str:
        return f"Atom({self.text})"

    @property
    def order(self) -> int:
        return sum(self.alpha) if self.kind == "jet" else 0

    @property
    def is_variable(self) -> bool:
        return self.kind != "func"


def _intern(key: tuple, fill) -> Atom:
    a = _BY_KEY.get(key)
    if a is not None:
        return a
    with _LOCK:
        a = _BY_KEY.get(key)
        if a is None:
            a = Atom()
            a.index = a.L = a.alpha = a.name = a.arg = None
            fill(a)
            a.key = key
            a.id = len(_REGISTRY)
            if a.kind != "func":
                a.free = frozenset((a.id,))
            _REGISTRY.append(a)
            _BY_KEY[key] = a
    return a


def get(atom_id: int) -> Atom:
    return _REGISTRY[atom_id]


def base(i: int) -> Atom:
    if i < 1:
        raise ValueError(f"base variable index must be >= 1, got {i}")

    def fill(a):
        a.kind, a.index, a.text = "x", i, f"x{i}"

    return _intern((0, i), fill)


def jet(L: int, alpha) -> Atom:
    alpha = tuple(int(v) for v in alpha)
    if L < 1 or any(v < 0 for v in alpha) or not alpha:
        raise ValueError(f"bad jet coordinate L={L}, alpha={alpha}")

    def fill(a):
        a.kind, a.L, a.alpha = "jet", L, alpha
        a.text = f"u{L}[{','.join(str(v) for v in alpha)}]"

    return _intern((1, sum(alpha), L, alpha), fill)


def param(name: str) -> Atom:
    def fill(a):
        a.kind, a.name, a.text = "param", name, name

    return _intern((2, name), fill)


def func(name: str, arg) -> Atom:
    """Function atom; ``arg`` must be a normal-form Expr."""
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    text = f"{name}({arg})"

    def fill(a):
        a.kind, a.name, a.arg, a.text = "func", name, arg, text
        a.free = arg.free_ids

    return _intern((3, name, str(arg)), fill)
