"""Compile expressions into a flat register program for fast float evaluation.

Registers 0..nvars-1 hold the inputs.  Each instruction writes one new
register.  Shared subterms (atom powers, function atoms, denominator factors)
are computed once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..expr import Expr, as_expr, atoms

OP_CONST, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POWI, OP_NEG = 0, 1, 2, 3, 4, 5, 6
OP_SIN, OP_COS, OP_EXP, OP_LN, OP_SQRT = 7, 8, 9, 10, 11

FUNC_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "ln": OP_LN, "sqrt": OP_SQRT}


@dataclass
class Tape:
    nvars: int
    nregs: int
    op: np.ndarray
    dst: np.ndarray
    a: np.ndarray
    b: np.ndarray
    consts: np.ndarray
    outputs: np.ndarray
    var_ids: tuple

    @property
    def nout(self) -> int:
        return len(self.outputs)

    def __len__(self) -> int:
        return len(self.op)


class _Builder:
    def __init__(self, var_ids):
        self.var_ids = tuple(var_ids)
        self.reg_of_atom = {aid: i for i, aid in enumerate(self.var_ids)}
        self.nregs = len(self.var_ids)
        self.code = []
        self.consts = []
        self.const_reg = {}
        self.memo = {}

    def emit(self, op, a=0, b=0) -> int:
        r = self.nregs
        self.nregs += 1
        self.code.append((op, r, a, b))
        return r

    def const(self, c) -> int:
        c = float(c)
        r = self.const_reg.get(c)
        if r is None:
            self.consts.append(c)
            r = self.emit(OP_CONST, 0, len(self.consts) - 1)
            self.const_reg[c] = r
        return r

    def atom(self, aid: int) -> int:
        r = self.reg_of_atom.get(aid)
        if r is not None:
            return r
        a = atoms.get(aid)
        if a.kind != "func":
            raise KeyError(f"variable {a.text} is not an input of the tape")
        inner = self.rat(a.arg.rat)
        r = self.emit(FUNC_OPS[a.name], inner)
        self.reg_of_atom[aid] = r
        return r

    def power(self, aid: int, e: int) -> int:
        if e == 1:
            return self.atom(aid)
        key = ("pow", aid, e)
        r = self.memo.get(key)
        if r is None:
            r = self.emit(OP_POWI, self.atom(aid), e)
            self.memo[key] = r
        return r

    def mono(self, mono) -> int | None:
        if not mono:
            return None
        key = ("mono", mono)
        r = self.memo.get(key)
        if r is None:
            regs = [self.power(aid, e) for aid, e in mono]
            r = regs[0]
            for q in regs[1:]:
                r = self.emit(OP_MUL, r, q)
            self.memo[key] = r
        return r

    def poly(self, p: dict) -> int:
        if not p:
            return self.const(0.0)
        acc = None
        for mono, c in sorted(p.items(), key=lambda mc: mc[0]):
            m = self.mono(mono)
            if m is None:
                term = self.const(c)
            elif c == 1:
                term = m
            elif c == -1:
                term = self.emit(OP_NEG, m)
            else:
                term = self.emit(OP_MUL, self.const(c), m)
            acc = term if acc is None else self.emit(OP_ADD, acc, term)
        return acc

    def factor(self, f) -> int:
        key = ("factor", id(f))
        r = self.memo.get(key)
        if r is None:
            r = self.poly(f.poly)
            self.memo[key] = r
        return r

    def rat(self, r) -> int:
        num = self.poly(r.num)
        if not r.den:
            return num
        den = None
        for f, e in r.den:
            base = self.factor(f)
            term = base if e == 1 else self.emit(OP_POWI, base, e)
            den = term if den is None else self.emit(OP_MUL, den, term)
        return self.emit(OP_DIV, num, den)


def compile_exprs(exprs, variables) -> Tape:
    """Compile ``exprs`` as functions of ``variables`` (Exprs or atom ids)."""
    var_ids = [v if isinstance(v, int) else v.atom.id for v in variables]
    b = _Builder(var_ids)
    outs = [b.rat(as_expr(e).rat) for e in exprs]
    code = np.array(b.code, dtype=np.int64).reshape(-1, 4)
    return Tape(
        nvars=len(var_ids),
        nregs=b.nregs,
        op=np.ascontiguousarray(code[:, 0], dtype=np.int32),
        dst=np.ascontiguousarray(code[:, 1], dtype=np.int32),
        a=np.ascontiguousarray(code[:, 2], dtype=np.int32),
        b=np.ascontiguousarray(code[:, 3], dtype=np.int32),
        consts=np.asarray(b.consts, dtype=np.float64),
        outputs=np.asarray(outs, dtype=np.int32),
        var_ids=tuple(var_ids),
    )
