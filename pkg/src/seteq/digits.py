"""Base-7 digit strings and digit patterns compiled to automata.

A pattern denotes the set of valuations of the strings it accepts. Grammar
(whitespace ignored, digits 0-6, ``W`` = any digit)::

    pattern := alt (('\\' | '&') alt)*        difference / intersection, left-assoc
    alt     := seq ('|' seq)*
    seq     := atom+
    atom    := (class | '(' pattern ')') ['*' | '+']
    class   := digit | '[' digit+ ']' | 'W'
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numset import Window, WindowSet, indices_to_bits

DIGITS = tuple(range(7))


def val7(w: str) -> int:
    """Value of a base-7 digit string; the empty string is 0."""
    n = 0
    for ch in w:
        d = ord(ch) - 48
        if not 0 <= d <= 6:
            raise ValueError(f"not a base-7 digit: {ch!r}")
        n = 7 * n + d
    return n


def rep7(n: int) -> str:
    if n < 0:
        raise ValueError("rep7 needs n >= 0")
    if n == 0:
        return "0"
    out = []
    while n:
        n, r = divmod(n, 7)
        out.append(chr(48 + r))
    return "".join(reversed(out))


def bin36_value(x: str) -> int:
    """Number written in binary with 3 for zero and 6 for one (empty string is 0)."""
    n = 0
    for ch in x:
        if ch not in "36":
            raise ValueError(f"binary witness digit must be 3 or 6, got {ch!r}")
        n = 2 * n + (ch == "6")
    return n


def bin36_encode(n: int) -> str:
    """Shortest {3,6}-string with value n (``""`` for 0)."""
    if n < 0:
        raise ValueError("negative")
    return format(n, "b").replace("0", "3").replace("1", "6") if n else ""


# -- pattern syntax ---------------------------------------------------------

class PatternSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokens(src: str) -> list[tuple[str, int]]:
    return [(ch, i) for i, ch in enumerate(src) if not ch.isspace()]


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokens(src)
        self.i = 0
        self.end = len(src)

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else self.end

    def take(self, ch: str) -> None:
        if self.peek() != ch:
            raise PatternSyntaxError(f"expected {ch!r}", self.pos())
        self.i += 1

    def pattern(self):
        node = self.alt()
        while self.peek() in ("\\", "&"):
            op = "diff" if self.peek() == "\\" else "and"
            self.i += 1
            node = (op, node, self.alt())
        return node

    def alt(self):
        items = [self.seq()]
        while self.peek() == "|":
            self.i += 1
            items.append(self.seq())
        return items[0] if len(items) == 1 else ("alt", tuple(items))

    def seq(self):
        items = []
        while self.peek() is not None and self.peek() not in "|\\&)":
            items.append(self.atom())
        if not items:
            raise PatternSyntaxError("empty term", self.pos())
        return items[0] if len(items) == 1 else ("seq", tuple(items))

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.i += 1
            node = self.pattern()
            self.take(")")
        elif ch == "[":
            start = self.pos()
            self.i += 1
            ds = set()
            while self.peek() is not None and self.peek() != "]":
                ds.add(self.digit())
            self.take("]")
            if not ds:
                raise PatternSyntaxError("empty class", start)
            node = ("class", frozenset(ds))
        elif ch == "W":
            self.i += 1
            node = ("class", frozenset(DIGITS))
        else:
            node = ("class", frozenset([self.digit()]))
        if self.peek() == "*":
            self.i += 1
            node = ("star", node)
        elif self.peek() == "+":
            self.i += 1
            node = ("plus", node)
        return node

    def digit(self) -> int:
        ch = self.peek()
        if ch is None or not ("0" <= ch <= "6"):
            raise PatternSyntaxError(f"expected a digit 0-6, got {ch!r}", self.pos())
        self.i += 1
        return ord(ch) - 48


def parse_pattern(src: str):
    """Parse pattern text into a small tuple AST."""
    p = _Parser(src)
    node = p.pattern()
    if p.peek() is not None:
        raise PatternSyntaxError(f"unexpected {p.peek()!r}", p.pos())
    return node


# -- automata ---------------------------------------------------------------

@dataclass(frozen=True)
class DFA:
    """Complete DFA over the digits 0-6, reading most significant digit first."""

    trans: tuple  # trans[state][digit] -> state
    start: int
    accept: frozenset

    def run(self, w: str, state: int | None = None) -> int:
        s = self.start if state is None else state
        for ch in w:
            s = self.trans[s][ord(ch) - 48]
        return s

    def accepts(self, w: str) -> bool:
        return self.run(w) in self.accept

    @property
    def n_states(self) -> int:
        return len(self.trans)


class _NFA:
    def __init__(self):
        self.edges: list[list[tuple[frozenset | None, int]]] = []

    def new(self) -> int:
        self.edges.append([])
        return len(self.edges) - 1

    def add(self, s: int, label, t: int) -> None:
        self.edges[s].append((label, t))

    def build(self, node) -> tuple[int, int]:
        kind = node[0]
        if kind == "class":
            s, t = self.new(), self.new()
            self.add(s, node[1], t)
            return s, t
        if kind == "seq":
            s, t = self.build(node[1][0])
            for sub in node[1][1:]:
                s2, t2 = self.build(sub)
                self.add(t, None, s2)
                t = t2
            return s, t
        if kind == "alt":
            s, t = self.new(), self.new()
            for sub in node[1]:
                s2, t2 = self.build(sub)
                self.add(s, None, s2)
                self.add(t2, None, t)
            return s, t
        if kind in ("star", "plus"):
            s, t = self.new(), self.new()
            s2, t2 = self.build(node[1])
            self.add(s, None, s2)
            self.add(t2, None, s2)
            self.add(t2, None, t)
            if kind == "star":
                self.add(s, None, t)
            return s, t
        # diff / and: compile operands separately and embed the product DFA
        a, b = _compile_ast(node[1]), _compile_ast(node[2])
        d = product(a, b, (lambda x, y: x and not y) if kind == "diff" else (lambda x, y: x and y))
        base = len(self.edges)
        for _ in range(d.n_states):
            self.new()
        t = self.new()
        for q, row in enumerate(d.trans):
            for digit, r in enumerate(row):
                self.add(base + q, frozenset([digit]), base + r)
            if q in d.accept:
                self.add(base + q, None, t)
        return base + d.start, t

    def closure(self, states) -> frozenset:
        stack, seen = list(states), set(states)
        while stack:
            s = stack.pop()
            for label, t in self.edges[s]:
                if label is None and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)


def _determinize(nfa: _NFA, start: int, final: int) -> DFA:
    s0 = nfa.closure([start])
    index = {s0: 0}
    order = [s0]
    trans = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for d in DIGITS:
            nxt = nfa.closure([t for s in cur for label, t in nfa.edges[s] if label is not None and d in label])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        trans.append(tuple(row))
        i += 1
    accept = frozenset(k for k, st in enumerate(order) if final in st)
    return minimize(DFA(tuple(trans), 0, accept))


def minimize(d: DFA) -> DFA:
    """Moore partition refinement restricted to reachable states."""
    reach, stack = {d.start}, [d.start]
    while stack:
        for r in d.trans[stack.pop()]:
            if r not in reach:
                reach.add(r)
                stack.append(r)
    states = sorted(reach)
    block = {q: int(q in d.accept) for q in states}
    while True:
        sig = {q: (block[q],) + tuple(block[r] for r in d.trans[q]) for q in states}
        ids: dict = {}
        new = {q: ids.setdefault(sig[q], len(ids)) for q in states}
        if len(ids) == len(set(block.values())):
            block = new
            break
        block = new
    n = len(set(block.values()))
    trans = [None] * n
    for q in states:
        trans[block[q]] = tuple(block[r] for r in d.trans[q])
    return DFA(tuple(trans), block[d.start], frozenset(block[q] for q in states if q in d.accept))


def product(a: DFA, b: DFA, keep) -> DFA:
    index = {(a.start, b.start): 0}
    order = [(a.start, b.start)]
    trans = []
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for dgt in DIGITS:
            nxt = (a.trans[p][dgt], b.trans[q][dgt])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        trans.append(tuple(row))
        i += 1
    accept = frozenset(k for k, (p, q) in enumerate(order) if keep(p in a.accept, q in b.accept))
    return minimize(DFA(tuple(trans), 0, accept))


def _compile_ast(node) -> DFA:
    nfa = _NFA()
    s, t = nfa.build(node)
    return _determinize(nfa, s, t)


# -- digit patterns ---------------------------------------------------------

@dataclass(frozen=True)
class DigitPattern:
    """Regular set of base-7 strings, denoting the valuations of its strings."""

    source: str
    dfa: DFA = field(compare=False, repr=False)

    def __str__(self) -> str:
        return self.source

    def accepts(self, w: str) -> bool:
        return self.dfa.accepts(w)

    @cached_property
    def _zero_states(self) -> list[int]:
        # states after reading 0^k, k <= |Q|; a longer zero prefix would repeat one of these
        out, s = [], self.dfa.start
        for _ in range(self.dfa.n_states + 1):
            if s not in out:
                out.append(s)
            s = self.dfa.trans[s][0]
        return out

    def member(self, n: int) -> bool:
        if n < 0:
            return False
        if n == 0 and self.dfa.start in self.dfa.accept:
            return True
        w = rep7(n)
        return any(self.dfa.run(w, q) in self.dfa.accept for q in self._zero_states)

    __contains__ = member

    def member_array(self, n: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`member` for an array of naturals."""
        table = np.array(self.dfa.trans, dtype=np.int64)
        acc = np.zeros(self.dfa.n_states, dtype=bool)
        acc[list(self.dfa.accept)] = True
        top = int(n.max()) if n.size else 0
        ndig = len(rep7(top))
        out = np.zeros(n.shape, dtype=bool)
        for q in self._zero_states:
            state = np.full(n.shape, q, dtype=np.int64)
            for p in range(ndig - 1, -1, -1):
                scale = 7**p
                digit = (n // scale) % 7
                active = n >= scale if p else np.ones(n.shape, dtype=bool)
                state = np.where(active, table[state, digit], state)
            out |= acc[state]
        if self.dfa.start in self.dfa.accept:
            out |= n == 0
        return out

    def enumerate(self, w: Window) -> WindowSet:
        """All members in the window; exact on the whole window."""
        lo = max(w.lo, 0)
        if lo > w.hi:
            return WindowSet.empty(w)
        n = np.arange(lo, w.hi + 1, dtype=np.int64)
        idx = np.flatnonzero(self.member_array(n)) + (lo - w.lo)
        bits = indices_to_bits(idx, w.size)
        if self.min_len is None:
            support = (float("inf"), float("-inf"))
        elif self.max_len is None:
            support = (0, float("inf"))
        else:
            support = (0, 7**self.max_len - 1)
        return WindowSet(w, bits, None, support)

    # -- combinators --------------------------------------------------
    def __and__(self, other: "DigitPattern") -> "DigitPattern":
        return DigitPattern(f"({self.source}) & ({other.source})", product(self.dfa, other.dfa, lambda x, y: x and y))

    def __or__(self, other: "DigitPattern") -> "DigitPattern":
        return DigitPattern(f"({self.source}) | ({other.source})", product(self.dfa, other.dfa, lambda x, y: x or y))

    def __sub__(self, other: "DigitPattern") -> "DigitPattern":
        return DigitPattern(f"({self.source}) \\ ({other.source})", product(self.dfa, other.dfa, lambda x, y: x and not y))

    # -- annotations --------------------------------------------------
    @cached_property
    def _live(self) -> set[int]:
        """States from which an accepting state is reachable."""
        live = set(self.dfa.accept)
        changed = True
        while changed:
            changed = False
            for q, row in enumerate(self.dfa.trans):
                if q not in live and any(r in live for r in row):
                    live.add(q)
                    changed = True
        return live

    @cached_property
    def min_len(self) -> int | None:
        """Length of the shortest accepted string (None if the language is empty)."""
        frontier, seen, k = {self.dfa.start}, {self.dfa.start}, 0
        while frontier:
            if frontier & self.dfa.accept:
                return k
            frontier = {r for q in frontier for r in self.dfa.trans[q]} - seen
            seen |= frontier
            k += 1
        return None

    @cached_property
    def max_len(self) -> int | None:
        """Length of the longest accepted string, or None if unbounded (or empty language)."""
        live = self._live
        if self.dfa.start not in live:
            return 0
        # longest path in the live subgraph; a live cycle means unbounded
        memo: dict[int, int] = {}
        visiting: set[int] = set()

        def longest(q: int) -> float:
            if q in memo:
                return memo[q]
            if q in visiting:
                return float("inf")
            visiting.add(q)
            best = 0 if q in self.dfa.accept else -1
            for r in self.dfa.trans[q]:
                if r in live:
                    sub = longest(r)
                    best = max(best, sub + 1)
            visiting.discard(q)
            memo[q] = best
            return best

        res = longest(self.dfa.start)
        return None if res == float("inf") else int(res)

    @cached_property
    def power_family(self) -> tuple[int, int] | None:
        """``(a, k0)`` when the pattern is exactly ``{a * 7^k : k >= k0}`` as strings ``s 0*``, else None."""
        k = self.min_len
        if k is None or k == 0:
            return None
        # the shortest accepted string; candidate language: that string followed by 0*
        s = ""
        q = self.dfa.start
        for step in range(k):
            for dgt in DIGITS:
                nxt = self.dfa.trans[q][dgt]
                if self._dist_to_accept(nxt) == k - step - 1:
                    s += str(dgt)
                    q = nxt
                    break
        if s[0] == "0":
            return None
        cand = compile_pattern(" ".join(s) + " 0*")
        if product(self.dfa, cand.dfa, lambda x, y: x != y).accept:
            return None
        stripped = s.rstrip("0")
        return val7(stripped), len(s) - len(stripped)

    def _dist_to_accept(self, q: int) -> float:
        frontier, seen, k = {q}, {q}, 0
        while frontier:
            if frontier & self.dfa.accept:
                return k
            frontier = {r for p in frontier for r in self.dfa.trans[p]} - seen
            seen |= frontier
            k += 1
        return float("inf")

    @property
    def digit_delta(self) -> dict:
        return {"min_len": self.min_len, "max_len": self.max_len, "power_family": self.power_family}


def compile_pattern(src: str) -> DigitPattern:
    """Compile pattern text; raises :class:`PatternSyntaxError` with the offending position."""
    ast = parse_pattern(src)
    return DigitPattern(" ".join(src.split()), _compile_ast(ast))


pattern_compile = compile_pattern


def pattern_member(p: DigitPattern, n: int) -> bool:
    return p.member(n)


def pattern_enumerate(p: DigitPattern, w: Window) -> WindowSet:
    return p.enumerate(w)
