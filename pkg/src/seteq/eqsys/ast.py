"""Expression trees, constraints and systems over sets of integers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Union as TUnion

import numpy as np

from ..digits import DigitPattern
from ..numset import INF, UPSet, Window, WindowSet, indices_to_bits


class SystemError_(ValueError):
    """Malformed system or expression (undeclared variable, forbidden operator...)."""


@dataclass(frozen=True)
class Oracle:
    """Named decidable membership predicate used as a constant set.

    ``support`` bounds the set when known; ``vectorized`` optionally maps a
    numpy array of integers to a boolean mask.
    """

    name: str
    predicate: Callable[[int], bool] = field(compare=False, repr=False)
    support: tuple[float, float] = field(default=(-INF, INF), compare=False)
    vectorized: Callable | None = field(default=None, compare=False, repr=False)

    def member(self, n: int) -> bool:
        return bool(self.predicate(n))

    def enumerate(self, w: Window) -> WindowSet:
        n = np.arange(w.lo, w.hi + 1, dtype=np.int64)
        if self.vectorized is not None:
            mask = np.asarray(self.vectorized(n), dtype=bool)
        else:
            mask = np.fromiter((self.predicate(int(x)) for x in n), dtype=bool, count=n.size)
        return WindowSet(w, indices_to_bits(np.flatnonzero(mask), w.size), None, self.support)


ConstValue = TUnion[UPSet, DigitPattern, Oracle]


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def walk(self) -> Iterator["Expr"]:
        yield self
        for c in self.children():
            yield from c.walk()

    def variables(self) -> set[str]:
        return {n.name for n in self.walk() if isinstance(n, Var)}

    def consts(self) -> list["Const"]:
        return [n for n in self.walk() if isinstance(n, Const)]


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    name: str
    value: ConstValue


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Union(_Binary):
    pass


class Intersect(_Binary):
    pass


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class TruncSub(_Binary):
    pass


@dataclass(frozen=True)
class Negate(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


def union_all(items: list[Expr]) -> Expr:
    out = items[0]
    for e in items[1:]:
        out = Union(out, e)
    return out


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Inclusion:
    """``lhs ⊆ rhs``."""

    lhs: Expr
    rhs: Expr


Constraint = TUnion[Equation, Inclusion]


@dataclass(frozen=True)
class System:
    domain: str  # "nat" or "int"
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    output: str | None = None

    def __post_init__(self):
        if self.domain not in ("nat", "int"):
            raise SystemError_(f"unknown domain {self.domain!r}")
        if not self.constraints:
            raise SystemError_("a system needs at least one constraint")
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise SystemError_("duplicate variable declaration")
        for i, c in enumerate(self.constraints):
            for side in (c.lhs, c.rhs):
                missing = side.variables() - declared
                if missing:
                    raise SystemError_(f"constraint {i + 1}: undeclared variable(s) {sorted(missing)}")
                if self.domain == "nat":
                    for node in side.walk():
                        if isinstance(node, (Sub, Negate)):
                            raise SystemError_(
                                f"constraint {i + 1}: {type(node).__name__} is not allowed over N (use tsub)")
        if self.output is not None and self.output not in declared:
            raise SystemError_(f"output variable {self.output!r} is not declared")
        self.consts()  # validates name clashes

    def consts(self) -> dict[str, ConstValue]:
        """Constants by name, in order of first occurrence."""
        out: dict[str, ConstValue] = {}
        for c in self.constraints:
            for side in (c.lhs, c.rhs):
                for k in side.consts():
                    if k.name in out and out[k.name] != k.value:
                        raise SystemError_(f"constant name {k.name!r} bound to two different values")
                    out.setdefault(k.name, k.value)
        return out

    def resolved(self) -> dict[str, Expr] | None:
        """``{X: rhs}`` when every variable has exactly one defining equation ``X = rhs``."""
        defs: dict[str, Expr] = {}
        for c in self.constraints:
            if isinstance(c, Equation) and isinstance(c.lhs, Var) and c.lhs.name not in defs:
                defs[c.lhs.name] = c.rhs
        if set(defs) != set(self.variables):
            return None
        return defs

    def side_constraints(self) -> list[Constraint]:
        """Constraints that are not the resolved definitions."""
        defs = self.resolved() or {}
        used: set[str] = set()
        rest = []
        for c in self.constraints:
            if (isinstance(c, Equation) and isinstance(c.lhs, Var) and c.lhs.name in defs
                    and c.lhs.name not in used and c.rhs == defs[c.lhs.name]):
                used.add(c.lhs.name)
                continue
            rest.append(c)
        return rest


def rename(e: Expr, mapping: dict[str, str]) -> Expr:
    """Rename variables (and constants, via the same mapping) in an expression."""
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, Const):
        return Const(mapping.get("const:" + e.name, e.name), e.value)
    if isinstance(e, Negate):
        return Negate(rename(e.arg, mapping))
    return type(e)(rename(e.left, mapping), rename(e.right, mapping))


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Negate):
        return Negate(substitute(e.arg, mapping))
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))
