"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('-'|'+') unary | factor
    factor := atom ('^' ['-'] int)?
    atom   := number | 'x' int | 'u' int '[' int (',' int)* ']'
            | func '(' expr ')' | param | '(' expr ')'

Unary minus, decimal literals, negative exponents and named parameters are
accepted on top of the minimal grammar.  Products are kept as factor lists
while parsing so that division inverts factor by factor; that is what makes
print -> parse reproduce the same normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import atoms as _atoms
from .poly import UNIT, r_inv, r_mul, r_neg, r_pow, r_add, r_sub
from .tree import Expr, apply_func, from_rat, var


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at offset {pos}")
        self.msg = msg
        self.pos = pos
        self.text = text


@dataclass(frozen=True)
class Signature:
    """Jet-space signature used to validate variable names.

    ``n`` and ``m`` may be ``None`` to accept any index.
    """

    n: int | None = None
    m: int | None = None
    params: tuple = field(default=())


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],]))"
)


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, op):
        t = self.peek()
        if t[0] != "op" or t[1] != op:
            what = "end of input" if t[0] == "end" else repr(t[1])
            self.error(f"expected {op!r}, found {what}")
        return self.take()

    def int_token(self) -> int:
        t = self.peek()
        if t[0] != "num" or "." in t[1]:
            what = "end of input" if t[0] == "end" else repr(t[1])
            self.error(f"expected integer, found {what}")
        self.take()
        return int(t[1])

    # A parsed item is a list of (Rat, exponent) factors.
    @staticmethod
    def collapse(factors):
        r = UNIT
        for f, e in factors:
            if e >= 0:
                r = r_mul(r, r_pow(f, e))
            else:
                if f.is_zero:
                    raise ZeroDivisionError("division by zero")
                r = r_mul(r, r_pow(r_inv(f), -e))
        return r

    def parse(self):
        r = self.expr()
        t = self.peek()
        if t[0] != "end":
            self.error(f"unexpected {t[1]!r}")
        return r

    def expr(self):
        first = self.term()
        if not (self.peek()[0] == "op" and self.peek()[1] in "+-"):
            return first
        acc = self.collapse(first)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.collapse(self.term())
            acc = r_add(acc, rhs) if op == "+" else r_sub(acc, rhs)
        return [(acc, 1)]

    def term(self):
        factors = list(self.unary())
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                factors.extend(rhs)
            else:
                factors.extend((f, -e) for f, e in rhs)
        return factors

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            inner = self.unary()
            if t[1] == "+":
                return inner
            (f, e), *rest = inner
            if e == 1:
                return [(r_neg(f), 1)] + rest
            return [(r_neg(UNIT), 1)] + inner
        return self.factor()

    def factor(self):
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            k = sign * self.int_token()
            return [(f, e * k) for f, e in base]
        return base

    def atom(self):
        t = self.peek()
        kind, val, pos = t
        if kind == "num":
            self.take()
            return [(from_rat_const(Fraction(val)), 1)]
        if kind == "op" and val == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "name":
            self.take()
            return [(self.name(val, pos).rat, 1)]
        what = "end of input" if kind == "end" else repr(val)
        self.error(f"expected operand, found {what}")

    def name(self, val: str, pos: int) -> Expr:
        sig = self.sig
        if val in _atoms.FUNCTIONS:
            self.expect("(")
            arg = from_rat(self.collapse(self.expr()))
            self.expect(")")
            return apply_func(val, arg)
        m = re.fullmatch(r"x(\d+)", val)
        if m:
            i = int(m.group(1))
            if i < 1 or (sig.n is not None and i > sig.n):
                raise ParseError(f"base variable {val} outside signature", pos, self.text)
            return var(_atoms.base(i))
        m = re.fullmatch(r"u(\d+)", val)
        if m:
            L = int(m.group(1))
            if L < 1 or (sig.m is not None and L > sig.m):
                raise ParseError(f"jet component {val} outside signature", pos, self.text)
            self.expect("[")
            alpha = [self.int_token()]
            while self.peek()[0] == "op" and self.peek()[1] == ",":
                self.take()
                alpha.append(self.int_token())
            self.expect("]")
            if sig.n is not None and len(alpha) != sig.n:
                raise ParseError(
                    f"multiindex of length {len(alpha)} for n={sig.n}", pos, self.text
                )
            return var(_atoms.jet(L, tuple(alpha)))
        if val in sig.params:
            return var(_atoms.param(val))
        raise ParseError(f"unknown identifier {val!r}", pos, self.text)


def from_rat_const(c: Fraction):
    from .poly import r_const

    return r_const(c)


def parse(text: str, sig: Signature | None = None, *, n=None, m=None, params=()) -> Expr:
    """Parse ``text`` into a normal-form expression."""
    if sig is None:
        sig = Signature(n, m, tuple(params))
    p = _Parser(text, sig)
    return from_rat(p.collapse(p.parse()))
