"""Flat key = value spec files describing a field or eps0 candidates.

    n = 1 ; m = 2 ; xi1 = "0" ; eta0_1 = "u2[1]/u1[1]" ; eta0_2 = "(u2[1]/u1[1])^2/2"

Assignments are separated by ';' or newlines, '#' starts a comment outside
quotes.  Expression values are double-quoted.  A spec either gives xi1..xin
and eta0_1..eta0_m, or phi1..phim (candidate eps0 components).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .expr import ParseError, Signature, parse
from .field import LBField

_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_META = ("name", "provenance")


class SpecError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclass
class FieldSpec:
    n: int
    m: int
    xi: list = field(default_factory=list)
    eta0: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    text: str = ""

    @property
    def kind(self) -> str:
        return "phi" if self.phi else "field"

    @property
    def name(self):
        return self.meta.get("name")

    def field(self) -> LBField:
        return LBField(self.n, self.m, self.xi, self.eta0, name=self.name)


def _assignments(text: str):
    """Yield (line, key, value, quoted)."""
    i, line, n = 0, 1, len(text)
    buf, quoted, start = [], False, 1
    items = []

    def flush():
        raw = "".join(buf).strip()
        if raw:
            items.append((start, raw))

    while i < n:
        c = text[i]
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise SpecError("unterminated string", line)
            chunk = text[i:j + 1]
            if "\n" in chunk:
                raise SpecError("string spans lines", line)
            buf.append(chunk)
            i = j + 1
            continue
        if c == "#":
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if c in ";\n":
            flush()
            buf = []
            if c == "\n":
                line += 1
            start = line
            i += 1
            continue
        if not buf and not c.isspace():
            start = line
        buf.append(c)
        i += 1
    flush()

    for ln, raw in items:
        if "=" not in raw:
            raise SpecError(f"expected key = value, got {raw!r}", ln)
        key, val = (s.strip() for s in raw.split("=", 1))
        if not _KEY.match(key):
            raise SpecError(f"bad key {key!r}", ln)
        if len(val) >= 2 and val[0] == '"' and val[-1] == '"':
            yield ln, key, val[1:-1], True
        elif '"' in val:
            raise SpecError(f"malformed value for {key}", ln)
        else:
            yield ln, key, val, False


def _indexed(kv: dict, prefix: str, count: int, lines: dict) -> list:
    out = []
    for k in range(1, count + 1):
        key = f"{prefix}{k}"
        if key not in kv:
            raise SpecError(f"missing {key}")
        out.append((key, kv[key]))
    extra = [k for k in kv if k.startswith(prefix) and k[len(prefix):].isdigit() and not 1 <= int(k[len(prefix):]) <= count]
    if extra:
        raise SpecError(f"{extra[0]} is outside the signature", lines[extra[0]])
    return out


def loads(text: str) -> FieldSpec:
    kv, lines = {}, {}
    for ln, key, val, quoted in _assignments(text):
        if key in kv:
            raise SpecError(f"duplicate key {key}", ln)
        kv[key] = val
        lines[key] = ln
    for k in ("n", "m"):
        if k not in kv:
            raise SpecError(f"missing {k}")
        if not kv[k].isdigit() or int(kv[k]) < 1:
            raise SpecError(f"{k} must be a positive integer", lines[k])
    n, m = int(kv["n"]), int(kv["m"])
    sig = Signature(n, m)
    known = {"n", "m", *_META}

    def expr(key, src):
        try:
            return parse(src, sig)
        except ParseError as exc:
            raise SpecError(f"{key}: {exc}", lines[key]) from exc

    spec = FieldSpec(n, m, meta={k: kv[k] for k in _META if k in kv}, text=text)
    if any(k.startswith("phi") for k in kv):
        if any(k.startswith(("xi", "eta0_")) for k in kv):
            raise SpecError("a spec gives either phi components or xi/eta0, not both")
        items = _indexed(kv, "phi", m, lines)
        spec.phi = [expr(k, v) for k, v in items]
    else:
        xs = _indexed(kv, "xi", n, lines)
        es = _indexed(kv, "eta0_", m, lines)
        spec.xi = [expr(k, v) for k, v in xs]
        spec.eta0 = [expr(k, v) for k, v in es]
        known |= {k for k, _ in xs + es}
    known |= {f"phi{k}" for k in range(1, m + 1)}
    unknown = sorted(set(kv) - known)
    if unknown:
        raise SpecError(f"unknown key {unknown[0]}", lines[unknown[0]])
    return spec


def load(path) -> FieldSpec:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps_field(f: LBField, meta: dict | None = None) -> str:
    meta = dict(meta or {})
    out = []
    if f.name and "name" not in meta:
        meta["name"] = f.name
    for k in _META:
        if k in meta:
            out.append(f'{k} = "{meta[k]}"')
    out.append(f"n = {f.n} ; m = {f.m}")
    out.append(" ; ".join(f'xi{i} = "{e}"' for i, e in enumerate(f.xi, start=1)))
    for L, e in enumerate(f.eta0, start=1):
        out.append(f'eta0_{L} = "{e}"')
    return "\n".join(out) + "\n"
