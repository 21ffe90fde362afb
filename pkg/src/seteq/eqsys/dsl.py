"""Line-oriented text format for systems.

::

    domain nat|int
    var X Y Z
    const C = up "{0} ∪ pos(0,2;{0})"
    const P = pattern "1 W*"
    const R = oracle even
    eq union(X, C) = add(Y, P)
    sub X <= C
    output X

Expression syntax: ``union(a,b) inter(a,b) add(a,b) tsub(a,b) sub(a,b) neg(a)``
over variable and constant names. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

from ..digits import DigitPattern, compile_pattern
from ..numset import INF, UPSet, format_upset, parse_upset
from .ast import (Add, Const, Equation, Expr, Inclusion, Intersect, Negate, Oracle, Sub, System,
                  SystemError_, TruncSub, Union, Var)


class DSLError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


# -- oracle registry ----------------------------------------------------------

ORACLES: dict[str, Oracle] = {}


def register_oracle(name: str, predicate: Callable[[int], bool], support=(-INF, INF),
                    vectorized: Callable | None = None) -> Oracle:
    o = Oracle(name, predicate, support, vectorized)
    ORACLES[name] = o
    return o


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


register_oracle("even", lambda n: n % 2 == 0, vectorized=lambda a: a % 2 == 0)
register_oracle("square", lambda n: n >= 0 and int(n**0.5) ** 2 == n or n >= 0 and (int(n**0.5) + 1) ** 2 == n,
                support=(0, INF),
                vectorized=lambda a: (a >= 0) & (np.floor(np.sqrt(np.maximum(a, 0))) ** 2 == a))
register_oracle("prime", _is_prime, support=(2, INF))

_BINARY = {"union": Union, "inter": Intersect, "add": Add, "tsub": TruncSub, "sub": Sub}
_NAMES = {v: k for k, v in _BINARY.items()}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(\()|(\))|(,))")


# -- expressions ----------------------------------------------------------------

def format_expr(e: Expr) -> str:
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Negate):
        return f"neg({format_expr(e.arg)})"
    return f"{_NAMES[type(e)]}({format_expr(e.left)}, {format_expr(e.right)})"


def _tokenize(text: str, line: int) -> list[str]:
    out, i = [], 0
    text = text.rstrip()
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise DSLError(f"unexpected character {text[i:].strip()[:1]!r} in expression", line)
        out.append(m.group(m.lastindex))
        i = m.end()
    return out


def parse_expr(text: str, variables: set[str], consts: dict[str, object], line: int | None = None) -> Expr:
    toks = _tokenize(text, line)
    pos = 0

    def expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            got = toks[pos] if pos < len(toks) else "end of line"
            raise DSLError(f"expected {tok!r}, got {got!r}", line)
        pos += 1

    def node() -> Expr:
        nonlocal pos
        if pos >= len(toks):
            raise DSLError("unexpected end of expression", line)
        tok = toks[pos]
        pos += 1
        if pos < len(toks) and toks[pos] == "(" and (tok in _BINARY or tok == "neg"):
            expect("(")
            if tok == "neg":
                arg = node()
                expect(")")
                return Negate(arg)
            left = node()
            expect(",")
            right = node()
            expect(")")
            return _BINARY[tok](left, right)
        if not _IDENT.fullmatch(tok):
            raise DSLError(f"unexpected token {tok!r}", line)
        if tok in variables:
            return Var(tok)
        if tok in consts:
            return Const(tok, consts[tok])
        raise DSLError(f"unknown name {tok!r}", line)

    e = node()
    if pos != len(toks):
        raise DSLError(f"trailing tokens after expression: {' '.join(toks[pos:])!r}", line)
    return e


# -- systems --------------------------------------------------------------------

def _format_const(name: str, value) -> str:
    if isinstance(value, UPSet):
        return f'const {name} = up "{format_upset(value)}"'
    if isinstance(value, DigitPattern):
        return f'const {name} = pattern "{value.source}"'
    if isinstance(value, Oracle):
        return f"const {name} = oracle {value.name}"
    raise TypeError(f"cannot serialize constant {value!r}")


def format_system(s: System) -> str:
    lines = [f"domain {s.domain}", "var " + " ".join(s.variables)]
    lines += [_format_const(k, v) for k, v in s.consts().items()]
    for c in s.constraints:
        if isinstance(c, Equation):
            lines.append(f"eq {format_expr(c.lhs)} = {format_expr(c.rhs)}")
        else:
            lines.append(f"sub {format_expr(c.lhs)} <= {format_expr(c.rhs)}")
    if s.output:
        lines.append(f"output {s.output}")
    return "\n".join(lines) + "\n"


def _split_top(text: str, sep: str, line: int) -> tuple[str, str]:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            return text[:i], text[i + len(sep):]
    raise DSLError(f"missing {sep!r}", line)


def parse_system(text: str, oracles: dict[str, Oracle] | None = None) -> System:
    """Parse the DSL; raises :class:`DSLError` naming the offending line."""
    registry = dict(ORACLES)
    if oracles:
        registry.update(oracles)
    domain = None
    variables: list[str] = []
    consts: dict[str, object] = {}
    constraints = []
    output = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "domain":
            if rest not in ("nat", "int"):
                raise DSLError(f"domain must be nat or int, got {rest!r}", no)
            domain = rest
        elif kw == "var":
            for name in rest.split():
                if not _IDENT.fullmatch(name):
                    raise DSLError(f"bad variable name {name!r}", no)
                if name in variables or name in consts:
                    raise DSLError(f"name {name!r} declared twice", no)
                variables.append(name)
        elif kw == "const":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_']*)\s*=\s*(up|pattern|oracle)\s+(.*)", rest)
            if not m:
                raise DSLError("const needs: const NAME = up|pattern|oracle VALUE", no)
            name, kind, body = m.groups()
            if name in consts or name in variables:
                raise DSLError(f"name {name!r} declared twice", no)
            try:
                if kind == "oracle":
                    if body.strip() not in registry:
                        raise DSLError(f"unknown oracle {body.strip()!r}", no)
                    consts[name] = registry[body.strip()]
                else:
                    bm = re.fullmatch(r'"(.*)"', body.strip())
                    if not bm:
                        raise DSLError(f"{kind} value must be double-quoted", no)
                    consts[name] = parse_upset(bm.group(1)) if kind == "up" else compile_pattern(bm.group(1))
            except DSLError:
                raise
            except ValueError as e:
                raise DSLError(str(e), no) from None
        elif kw in ("eq", "sub"):
            lhs, rhs = _split_top(rest, "=" if kw == "eq" else "<=", no)
            vs = set(variables)
            pair = (parse_expr(lhs, vs, consts, no), parse_expr(rhs, vs, consts, no))
            constraints.append(Equation(*pair) if kw == "eq" else Inclusion(*pair))
        elif kw == "output":
            output = rest
        else:
            raise DSLError(f"unknown keyword {kw!r}", no)
    if domain is None:
        raise DSLError("missing 'domain' line")
    try:
        return System(domain, tuple(variables), tuple(constraints), output)
    except SystemError_ as e:
        raise DSLError(str(e)) from None


def load_system(path, oracles: dict[str, Oracle] | None = None) -> System:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read(), oracles)
