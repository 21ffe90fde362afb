"""Exact ultimately periodic sets of integers, plus windowed bit-vector sets.

An :class:`UPSet` is stored in canonical form: a finite set of exceptions
between two periodic tails. Two UPSets denote the same set iff they compare
equal, so equality of results is a syntactic check.

A :class:`WindowSet` is a dense bit vector over a finite interval of integers
together with an exactness horizon (the sub-interval on which it is known to
agree with the infinite set it approximates) and a support bound (an interval
known to contain that infinite set).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

INT_BOUND = 2**63
INF = math.inf


def _check(n: int) -> int:
    if not -INT_BOUND <= n < INT_BOUND:
        raise OverflowError(f"integer {n} exceeds the 64-bit backing range")
    return n


def _lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return _check(out)


def _divisors(p: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(p) + 1) if p % d == 0]
    return sorted(set(small + [p // d for d in small]))


@dataclass(frozen=True)
class Tail:
    """Periodic tail: ``m`` is covered iff ``m >= threshold`` and ``m % period`` is a residue."""

    threshold: int = 0
    period: int = 1
    residues: frozenset = frozenset()

    def covers(self, m: int) -> bool:
        return m >= self.threshold and m % self.period in self.residues

    @property
    def empty(self) -> bool:
        return not self.residues


def _canon_tail(g: Callable[[int], bool], period: int, threshold: int) -> Tail:
    # g is periodic with `period` on [threshold, inf)
    for q in _divisors(period):
        if all(g(m) == g(m + q) for m in range(threshold, threshold + period)):
            break
    d = threshold
    while d > 0 and g(d - 1) == g(d - 1 + q):
        d -= 1
    residues = frozenset(m % q for m in range(d, d + q) if g(m))
    if not residues:
        return Tail(d, 1, frozenset())
    return Tail(d, q, residues)


@dataclass(frozen=True)
class UPSet:
    """Canonical ultimately periodic subset of Z.

    ``n`` is a member iff it is an exception, or ``pos`` covers ``n``, or
    ``neg`` covers ``-n``. Exceptions lie strictly between ``-neg.threshold``
    and ``pos.threshold``. Build instances with :meth:`from_predicate`,
    :meth:`finite` or :func:`parse_upset`; the raw constructor does not
    canonicalize.
    """

    exceptions: frozenset = frozenset()
    pos: Tail = field(default_factory=Tail)
    neg: Tail = field(default_factory=Tail)

    # -- construction -------------------------------------------------
    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], period: int, threshold: int) -> "UPSet":
        """Canonicalize a membership predicate that is ``period``-periodic for ``|n| >= threshold``."""
        _check(period)
        _check(threshold)
        threshold = max(threshold, 1)  # 0 sits on both sides
        pos = _canon_tail(pred, period, threshold)
        neg = _canon_tail(lambda m: pred(-m), period, threshold)
        exc = frozenset(n for n in range(-neg.threshold + 1, pos.threshold) if pred(n))
        return cls(exc, pos, neg)

    @classmethod
    def finite(cls, elems: Iterable[int]) -> "UPSet":
        s = frozenset(_check(int(e)) for e in elems)
        if not s:
            return EMPTY
        bound = max(abs(e) for e in s) + 1
        return cls.from_predicate(s.__contains__, 1, bound)

    @classmethod
    def progression(cls, residue: int, period: int, start: int | None = None, direction: int = 1) -> "UPSet":
        """``{n ≡ residue (mod period)}``, optionally only ``n >= start`` (or ``<=`` if direction < 0)."""
        if start is None:
            return cls.from_predicate(lambda n: n % period == residue % period, period, 0)
        if direction > 0:
            pred = lambda n: n >= start and n % period == residue % period
        else:
            pred = lambda n: n <= start and n % period == residue % period
        return cls.from_predicate(pred, period, abs(start) + period)

    # -- queries ------------------------------------------------------
    def __contains__(self, n: int) -> bool:
        return n in self.exceptions or self.pos.covers(n) or self.neg.covers(-n)

    member = __contains__

    @property
    def period(self) -> int:
        return _lcm(self.pos.period, self.neg.period)

    @property
    def reach(self) -> int:
        """Bound beyond which both tails are purely periodic."""
        return max(self.pos.threshold, self.neg.threshold)

    @property
    def is_finite(self) -> bool:
        return self.pos.empty and self.neg.empty

    @property
    def is_empty(self) -> bool:
        return self.is_finite and not self.exceptions

    def bounds(self) -> tuple[float, float]:
        """Smallest interval containing the set (``±inf`` for infinite sides); ``(inf, -inf)`` if empty."""
        if self.is_empty:
            return (INF, -INF)
        fin = list(self.exceptions)
        pos_first = self._first_tail_members(self.pos)
        neg_first = [-m for m in self._first_tail_members(self.neg)]
        lo = -INF if neg_first else min(fin + pos_first)
        hi = INF if pos_first else max(fin + neg_first)
        return (lo, hi)

    @staticmethod
    def _first_tail_members(t: Tail) -> list[int]:
        return [m for m in range(t.threshold, t.threshold + t.period) if m % t.period in t.residues]

    def elements_in(self, lo: int, hi: int) -> list[int]:
        return [n for n in range(lo, hi + 1) if n in self]

    def __str__(self) -> str:
        return format_upset(self)

    def __repr__(self) -> str:
        return f"UPSet({format_upset(self)!r})"

    # -- operators ----------------------------------------------------
    def __or__(self, other: "UPSet") -> "UPSet":
        return up_binary("union", self, other)

    def __and__(self, other: "UPSet") -> "UPSet":
        return up_binary("intersect", self, other)

    def __add__(self, other: "UPSet") -> "UPSet":
        return up_binary("add", self, other)

    def __sub__(self, other: "UPSet") -> "UPSet":
        return up_binary("subtract", self, other)

    def __neg__(self) -> "UPSet":
        return up_negate(self)


EMPTY = UPSet()


def _pointwise(f: Callable[[bool, bool], bool], s: UPSet, t: UPSet) -> UPSet:
    period = _lcm(s.period, t.period)
    span = max(s.reach, t.reach) + 1
    return UPSet.from_predicate(lambda n: f(n in s, n in t), period, span)


def _pieces(s: UPSet, period: int):
    """Split ``s`` into (finite part, upward progression starts, downward starts), all with step ``period``."""
    ups = [m for m in range(s.pos.threshold, s.pos.threshold + period) if s.pos.covers(m)]
    downs = [-m for m in range(s.neg.threshold, s.neg.threshold + period) if s.neg.covers(m)]
    return sorted(s.exceptions), ups, downs


def _minkowski(s: UPSet, t: UPSet) -> UPSet:
    period = _lcm(s.period, t.period)
    fs, us, ds = _pieces(s, period)
    ft, ut, dt = _pieces(t, period)
    finite = {_check(a + b) for a in fs for b in ft}
    up_min: dict[int, int] = {}
    down_max: dict[int, int] = {}
    classes: set[int] = set()

    def up(x: int) -> None:
        r = x % period
        if r not in up_min or x < up_min[r]:
            up_min[r] = _check(x)

    def down(x: int) -> None:
        r = x % period
        if r not in down_max or x > down_max[r]:
            down_max[r] = _check(x)

    for a in fs:
        for b in ut:
            up(a + b)
        for b in dt:
            down(a + b)
    for b in ft:
        for a in us:
            up(a + b)
        for a in ds:
            down(a + b)
    for a in us:
        for b in ut:
            up(a + b)
        for b in dt:
            classes.add((a + b) % period)
    for a in ds:
        for b in dt:
            down(a + b)
        for b in ut:
            classes.add((a + b) % period)

    def pred(n: int) -> bool:
        r = n % period
        if r in classes or n in finite:
            return True
        if r in up_min and n >= up_min[r]:
            return True
        return r in down_max and n <= down_max[r]

    marks = [abs(x) for x in finite] + [abs(x) for x in up_min.values()] + [abs(x) for x in down_max.values()]
    span = (max(marks) if marks else 0) + period + 1
    return UPSet.from_predicate(pred, period, span)


def up_negate(s: UPSet) -> UPSet:
    # the canonical form is symmetric, so swapping tails stays canonical
    return UPSet(frozenset(-e for e in s.exceptions), s.neg, s.pos)


def up_complement(s: UPSet, domain: str = "int") -> UPSet:
    """Complement within ``domain`` ('int' for Z, 'nat' for N)."""
    full = ZZ if domain == "int" else NAT
    return _pointwise(lambda a, b: b and not a, s, full)


def up_binary(op: str, s: UPSet, t: UPSet) -> UPSet:
    """Exact ``union``, ``intersect``, ``add``, ``subtract`` or ``truncsub`` of two UPSets.

    ``truncsub`` is ``(s - t) ∩ N``.
    """
    if op == "union":
        return _pointwise(lambda a, b: a or b, s, t)
    if op == "intersect":
        return _pointwise(lambda a, b: a and b, s, t)
    if op == "add":
        return _minkowski(s, t)
    if op == "subtract":
        return _minkowski(s, up_negate(t))
    if op == "truncsub":
        return up_binary("intersect", _minkowski(s, up_negate(t)), NAT)
    raise ValueError(f"unknown operation {op!r}")


def up_affine(s: UPSet, scale: int, offset: int = 0) -> UPSet:
    """``{scale*n + offset : n in s}`` for ``scale >= 1``."""
    if scale < 1:
        raise ValueError("scale must be positive")

    def pred(m: int) -> bool:
        q, r = divmod(m - offset, scale)
        return r == 0 and q in s

    return UPSet.from_predicate(pred, _check(scale * s.period), _check(scale * (s.reach + 1) + abs(offset)))


def up_member(s: UPSet, n: int) -> bool:
    return n in s


NAT = UPSet.from_predicate(lambda n: n >= 0, 1, 1)
ZZ = UPSet.from_predicate(lambda n: True, 1, 0)


# -- textual form -----------------------------------------------------------

def _fmt_tail(name: str, t: Tail) -> str:
    res = ",".join(str(r) for r in sorted(t.residues))
    return f"{name}({t.threshold},{t.period};{{{res}}})"


def format_upset(s: UPSet) -> str:
    parts = []
    if s.exceptions:
        parts.append("{" + ",".join(str(e) for e in sorted(s.exceptions)) + "}")
    if not s.pos.empty:
        parts.append(_fmt_tail("pos", s.pos))
    if not s.neg.empty:
        parts.append(_fmt_tail("neg", s.neg))
    return " ∪ ".join(parts) if parts else "∅"


_TAIL_RE = re.compile(r"^(pos|neg)\(\s*(\d+)\s*,\s*(\d+)\s*;\s*\{([^}]*)\}\s*\)$")


def _int_list(body: str) -> list[int]:
    body = body.strip()
    return [int(x) for x in body.split(",")] if body else []


def parse_upset(text: str) -> UPSet:
    """Parse ``{e1,...} ∪ pos(d,p;{r...}) ∪ neg(d,p;{r...})``; ``|`` is accepted for ``∪``."""
    text = text.strip()
    if text in ("∅", "{}", ""):
        return EMPTY
    exc: set[int] = set()
    tails = {"pos": [], "neg": []}
    for piece in re.split(r"∪|\|", text):
        piece = piece.strip()
        if piece in ("∅", "{}"):
            continue
        if piece.startswith("{") and piece.endswith("}"):
            try:
                exc.update(_int_list(piece[1:-1]))
            except ValueError as e:
                raise ValueError(f"bad exception list {piece!r}") from e
            continue
        m = _TAIL_RE.match(piece)
        if not m:
            raise ValueError(f"cannot parse UPSet piece {piece!r}")
        d, p = int(m.group(2)), int(m.group(3))
        if p < 1:
            raise ValueError(f"period must be >= 1 in {piece!r}")
        tails[m.group(1)].append(Tail(d, p, frozenset(r % p for r in _int_list(m.group(4)))))
    period = _lcm(*(t.period for ts in tails.values() for t in ts))
    reach = max([t.threshold for ts in tails.values() for t in ts] + [abs(e) + 1 for e in exc] + [0])

    def pred(n: int) -> bool:
        return (n in exc or any(t.covers(n) for t in tails["pos"])
                or any(t.covers(-n) for t in tails["neg"]))

    return UPSet.from_predicate(pred, period, reach)


# -- windows ----------------------------------------------------------------

class HorizonError(ValueError):
    """Membership asked outside the window or the certified horizon."""


@dataclass(frozen=True)
class Window:
    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @classmethod
    def digits(cls, d: int) -> "Window":
        """The natural-number window ``[0, 7^d - 1]``."""
        if d < 1:
            raise ValueError("digit cap must be >= 1")
        return cls(0, 7**d - 1)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def digit_cap(self) -> int:
        d = 0
        while 7 ** (d + 1) - 1 <= self.hi:
            d += 1
        return d

    @property
    def mask(self) -> int:
        return (1 << self.size) - 1

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi


def bits_to_indices(bits: int) -> np.ndarray:
    if bits == 0:
        return np.zeros(0, dtype=np.int64)
    raw = np.frombuffer(bits.to_bytes((bits.bit_length() + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.int64)


def indices_to_bits(idx: Iterable[int] | np.ndarray, size: int) -> int:
    arr = np.zeros(size + (-size) % 8, dtype=np.uint8)
    idx = np.asarray(list(idx) if not isinstance(idx, np.ndarray) else idx, dtype=np.int64)
    arr[idx] = 1
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def digit_horizon(hi: int) -> int:
    """Largest d with ``[0, 7^d - 1]`` inside ``[0, hi]``."""
    d = 0
    while 7 ** (d + 1) - 1 <= hi:
        d += 1
    return d


@dataclass(frozen=True)
class WindowSet:
    """Finite approximation of a set of integers on ``window``.

    ``horizon`` is the interval (inside the window) where the bits are exact,
    ``support`` an interval (bounds may be ``±inf``) containing the true set.
    """

    window: Window
    bits: int
    horizon: tuple[int, int] | None = None
    support: tuple[float, float] = (-INF, INF)
    unsound: bool = False

    def __post_init__(self):
        if self.horizon is None:
            object.__setattr__(self, "horizon", (self.window.lo, self.window.hi))
        lo, hi = self.horizon
        if lo <= hi and (lo < self.window.lo or hi > self.window.hi):
            raise ValueError("horizon must lie inside the window")
        if self.bits >> self.window.size:
            raise ValueError("bits outside the window")

    @classmethod
    def from_iterable(cls, window: Window, elems: Iterable[int], exact: bool = True) -> "WindowSet":
        """Window set holding ``elems``; with ``exact`` the true set is taken to be ``elems`` itself."""
        elems = sorted(set(int(e) for e in elems))
        for e in elems:
            if e not in window:
                raise HorizonError(f"{e} lies outside window [{window.lo}, {window.hi}]")
        bits = indices_to_bits([e - window.lo for e in elems], window.size)
        support = (elems[0], elems[-1]) if elems else (INF, -INF)
        return cls(window, bits, None, support if exact else (-INF, INF))

    @classmethod
    def empty(cls, window: Window) -> "WindowSet":
        return cls(window, 0, None, (INF, -INF))

    @classmethod
    def full(cls, window: Window) -> "WindowSet":
        return cls(window, window.mask, None, (window.lo, window.hi))

    @property
    def horizon_empty(self) -> bool:
        return self.horizon[0] > self.horizon[1]

    @property
    def horizon_digits(self) -> int:
        """Largest d with ``[0, 7^d - 1]`` inside the horizon (0 if none)."""
        lo, hi = self.horizon
        if lo > 0 or hi < 0:
            return 0
        return digit_horizon(hi)

    @property
    def bounded(self) -> bool:
        """True when the support lies inside the horizon, i.e. the whole true set is known."""
        return self.horizon[0] <= self.support[0] and self.support[1] <= self.horizon[1]

    def member(self, n: int, allow_unsound: bool = False) -> bool:
        if n not in self.window:
            raise HorizonError(f"{n} outside window [{self.window.lo}, {self.window.hi}]")
        if not allow_unsound and not (self.horizon[0] <= n <= self.horizon[1]):
            raise HorizonError(f"{n} outside certified horizon {self.horizon}")
        return bool(self.bits >> (n - self.window.lo) & 1)

    def __contains__(self, n: int) -> bool:
        return self.member(n)

    def elements(self) -> list[int]:
        return [int(i) + self.window.lo for i in bits_to_indices(self.bits)]

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements())

    def __len__(self) -> int:
        return self.bits.bit_count() if hasattr(self.bits, "bit_count") else bin(self.bits).count("1")

    def restrict_bits(self, lo: int, hi: int) -> int:
        """Bits of the elements in ``[lo, hi]`` (clipped to the window)."""
        lo, hi = max(lo, self.window.lo), min(hi, self.window.hi)
        if lo > hi:
            return 0
        width = hi - lo + 1
        return (self.bits >> (lo - self.window.lo)) & ((1 << width) - 1)

    def with_bits(self, bits: int) -> "WindowSet":
        return WindowSet(self.window, bits & self.window.mask, self.horizon, self.support, self.unsound)


def up_enumerate(s: UPSet, w: Window) -> WindowSet:
    """Enumerate an UPSet on a window; the result is exact on the whole window."""
    if s.is_finite and s.exceptions:
        inside = [e - w.lo for e in s.exceptions if e in w]
        bits = indices_to_bits(inside, w.size)
    else:
        n = np.arange(w.lo, w.hi + 1, dtype=np.int64)
        mask = np.isin(n, np.fromiter(s.exceptions, dtype=np.int64, count=len(s.exceptions)))
        if not s.pos.empty:
            mask |= (n >= s.pos.threshold) & np.isin(n % s.pos.period, list(s.pos.residues))
        if not s.neg.empty:
            mask |= (-n >= s.neg.threshold) & np.isin((-n) % s.neg.period, list(s.neg.residues))
        bits = indices_to_bits(np.flatnonzero(mask), w.size)
    return WindowSet(w, bits, None, s.bounds())


# -- windowed bit arithmetic ------------------------------------------------

def win_binary(op: str, a: WindowSet, b: WindowSet, domain: str = "int") -> WindowSet:
    """Bitwise union/intersect, and shifted-or add/truncsub, of two window sets on one window.

    Horizons follow the interval rules of :mod:`seteq.eqsys.evaluate`.
    """
    if a.window != b.window:
        raise ValueError("window mismatch")
    from .eqsys.evaluate import combine  # evaluate imports this module

    return combine(op, a, b, domain)
