"""Exact and windowed evaluation of set expressions.

Windowed values carry an exactness horizon and a support bound. The horizon
of every node is derived from its operands' horizons and supports so that,
whenever the operands agree with their true values on their horizons, the
node agrees with its true value on its own horizon. For ``a + b`` landing in
``[x, y]`` the contributing summands are confined to
``[x - sup(b).hi, y - sup(b).lo] ∩ sup(a)``; the horizon is the largest
``[x, y]`` for which that range (and the symmetric one for ``b``) lies inside
the operand horizons. Outside a node's support the value is certainly empty,
which can widen the horizon again.

Two regimes are available:

``horizon``
    the sound rule above.
``truncated``
    every value, variable or constant, is taken to be exactly its window
    contents, and every operation's result is cut back to the window. This is
    the semantics of the brute-force enumerator; horizons are the full window.
"""

from __future__ import annotations

from ..digits import DigitPattern
from ..numset import (INF, NAT, HorizonError, UPSet, Window, WindowSet, bits_to_indices,
                      indices_to_bits, up_binary, up_enumerate, up_negate)
from .ast import Add, Const, Expr, Intersect, Negate, Oracle, Sub, TruncSub, Union, Var

EMPTY_SUPPORT = (INF, -INF)

_const_cache: dict = {}


class RegimeError(ValueError):
    """Operation not available in the requested evaluation regime."""


# -- interval helpers -------------------------------------------------------

def _is_empty(sup) -> bool:
    return sup[0] > sup[1]


def _extend(window: Window, horizon: tuple[float, float], support) -> tuple[int, int]:
    """Widen a horizon by the region outside the support (known to be empty)."""
    lo, hi = window.lo, window.hi
    if _is_empty(support):
        return (lo, hi)
    x, y = horizon
    s, t = support
    pieces = [(-INF, s - 1), (t + 1, INF)]
    if x <= y:
        pieces.append((x, y))
    pieces.sort()
    merged: list[list[float]] = []
    for a, b in pieces:
        if a > b:
            continue
        if merged and a <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    clipped = [(max(a, lo), min(b, hi)) for a, b in merged]
    clipped = [(a, b) for a, b in clipped if a <= b]
    if not clipped:
        return (lo + 1, lo)  # empty
    if x <= y:
        for a, b in clipped:
            if a <= x and y <= b:
                return (int(a), int(b))
    a, b = max(clipped, key=lambda ab: ab[1] - ab[0])
    return (int(a), int(b))


def _clip(window: Window, x: float, y: float) -> tuple[int, int]:
    x, y = max(x, window.lo), min(y, window.hi)
    if x > y:
        return (window.lo + 1, window.lo)
    return (int(x), int(y))


def _sum_horizon(ha, sa, hb, sb) -> tuple[float, float]:
    """Largest [x, y] on which a + b is determined by a on ha and b on hb."""
    (xa, ya), (xb, yb) = ha, hb
    if xa > ya and not _is_empty(sa):
        return (1, 0)
    if xb > yb and not _is_empty(sb):
        return (1, 0)
    x, y = -INF, INF
    if sa[1] > ya:
        y = min(y, ya + sb[0])
    if sb[1] > yb:
        y = min(y, yb + sa[0])
    if sa[0] < xa:
        x = max(x, xa + sb[1])
    if sb[0] < xb:
        x = max(x, xb + sa[1])
    return (x, y)


def _shift(bits: int, k: int) -> int:
    return bits << k if k >= 0 else bits >> -k


def _convolve(a: WindowSet, b: WindowSet, sign: int) -> int:
    """Bits of ``{x + sign*y}`` cut to the window, from window contents."""
    w = a.window
    if sign > 0 and len(b) > len(a):
        a, b = b, a
    acc = 0
    for i in bits_to_indices(b.bits):
        acc |= _shift(a.bits, sign * (int(i) + w.lo))
    return acc & w.mask


def _neg_interval(iv):
    return (-iv[1], -iv[0])


# -- combinators --------------------------------------------------------------

def combine(op: str, a: WindowSet, b: WindowSet, domain: str = "int") -> WindowSet:
    """Windowed ``union``, ``intersect``, ``add``, ``subtract`` or ``truncsub`` with horizon bookkeeping."""
    w = a.window
    if b.window != w:
        raise ValueError("window mismatch")
    sa, sb = a.support, b.support
    if op == "union":
        bits = a.bits | b.bits
        sup = sb if _is_empty(sa) else sa if _is_empty(sb) else (min(sa[0], sb[0]), max(sa[1], sb[1]))
        hor = (max(a.horizon[0], b.horizon[0]), min(a.horizon[1], b.horizon[1]))
    elif op == "intersect":
        bits = a.bits & b.bits
        sup = (max(sa[0], sb[0]), min(sa[1], sb[1]))
        if _is_empty(sup):
            sup = EMPTY_SUPPORT
        hor = (max(a.horizon[0], b.horizon[0]), min(a.horizon[1], b.horizon[1]))
    elif op in ("add", "subtract", "truncsub"):
        sign = 1 if op == "add" else -1
        hb, sb2 = (b.horizon, sb) if sign > 0 else (_neg_interval(b.horizon), _neg_interval(sb))
        bits = _convolve(a, b, sign)
        if _is_empty(sa) or _is_empty(sb):
            sup, hor = EMPTY_SUPPORT, (w.lo, w.hi)
        else:
            sup = (sa[0] + sb2[0], sa[1] + sb2[1])
            hor = _sum_horizon(a.horizon, sa, hb, sb2)
        if op == "truncsub":
            nat = WindowSet(w, _nat_bits(w), None, (0, INF))
            return combine("intersect", WindowSet(w, bits, _clip(w, *hor), sup), nat, domain)
    else:
        raise ValueError(f"unknown operation {op!r}")
    if domain == "nat" and not _is_empty(sup):
        sup = (max(sup[0], 0), sup[1])
        if _is_empty(sup):
            sup = EMPTY_SUPPORT
    hor = _extend(w, _clip(w, *hor), sup)
    return WindowSet(w, bits, hor, sup, unsound=hor[0] > hor[1])


def _nat_bits(w: Window) -> int:
    if w.hi < 0:
        return 0
    start = max(w.lo, 0)
    return ((1 << (w.hi - start + 1)) - 1) << (start - w.lo)


def negate_window(a: WindowSet) -> WindowSet:
    w = a.window
    vals = -(bits_to_indices(a.bits) + w.lo)
    vals = vals[(vals >= w.lo) & (vals <= w.hi)]
    bits = indices_to_bits(vals - w.lo, w.size)
    sup = EMPTY_SUPPORT if _is_empty(a.support) else _neg_interval(a.support)
    hor = _extend(w, _clip(w, *_neg_interval(a.horizon)) if a.horizon[0] <= a.horizon[1] else (1, 0), sup)
    return WindowSet(w, bits, hor, sup, unsound=hor[0] > hor[1])


def const_window(value, w: Window) -> WindowSet:
    # oracles compare by name only, so they are cached by identity (the entry keeps them alive)
    key = (id(value), w) if isinstance(value, Oracle) else (value, w)
    if key not in _const_cache:
        if isinstance(value, UPSet):
            ws = up_enumerate(value, w)
            if value.is_empty:
                ws = WindowSet(w, 0, None, EMPTY_SUPPORT)
        elif isinstance(value, (DigitPattern, Oracle)):
            ws = value.enumerate(w)
        else:
            raise TypeError(f"unsupported constant {value!r}")
        if len(_const_cache) > 512:
            _const_cache.clear()
        _const_cache[key] = (value, ws)
    return _const_cache[key][1]


def _as_truncated(ws: WindowSet) -> WindowSet:
    idx = bits_to_indices(ws.bits)
    sup = (int(idx[0]) + ws.window.lo, int(idx[-1]) + ws.window.lo) if idx.size else EMPTY_SUPPORT
    return WindowSet(ws.window, ws.bits, None, sup)


# -- evaluation ---------------------------------------------------------------

_OPS = {Union: "union", Intersect: "intersect", Add: "add", Sub: "subtract", TruncSub: "truncsub"}


def evaluate_windowed(e: Expr, assignment: dict[str, WindowSet], window: Window,
                      domain: str = "int", regime: str = "horizon", strict: bool = False) -> WindowSet:
    """Evaluate ``e`` on ``window``; the result is exact on its reported horizon.

    With ``strict`` an empty horizon raises :class:`HorizonError`.
    """
    if regime not in ("horizon", "truncated"):
        raise RegimeError(f"unknown windowed regime {regime!r}")
    truncated = regime == "truncated"
    memo: dict[int, WindowSet] = {}

    def ev(node: Expr) -> WindowSet:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            try:
                val = assignment[node.name]
            except KeyError:
                raise RegimeError(f"variable {node.name!r} has no value") from None
            if val.window != window:
                raise ValueError(f"variable {node.name!r} lives on a different window")
            if truncated:
                val = _as_truncated(val)
            elif domain == "nat" and not _is_empty(val.support) and val.support[0] < 0:
                val = WindowSet(val.window, val.bits, val.horizon, (0, val.support[1]), val.unsound)
        elif isinstance(node, Const):
            val = const_window(node.value, window)
            if truncated:
                val = _as_truncated(val)
        elif isinstance(node, Negate):
            if domain == "nat":
                raise RegimeError("negation is not available over N")
            val = negate_window(ev(node.arg))
        else:
            if domain == "nat" and isinstance(node, Sub):
                raise RegimeError("unrestricted subtraction is not available over N")
            val = combine(_OPS[type(node)], ev(node.left), ev(node.right), domain)
            if truncated:
                val = _as_truncated(val)
        memo[key] = val
        return val

    out = ev(e)
    if strict and out.horizon[0] > out.horizon[1]:
        raise HorizonError("expression has an empty exactness horizon")
    return out


def evaluate_exact(e: Expr, assignment: dict[str, UPSet], domain: str = "int") -> UPSet:
    """Exact denotation of ``e`` when all constants are ultimately periodic."""
    if isinstance(e, Var):
        try:
            return assignment[e.name]
        except KeyError:
            raise RegimeError(f"variable {e.name!r} has no value") from None
    if isinstance(e, Const):
        if not isinstance(e.value, UPSet):
            raise RegimeError(f"constant {e.name!r} is not ultimately periodic; exact regime needs UP constants")
        return e.value
    if isinstance(e, Negate):
        if domain == "nat":
            raise RegimeError("negation is not available over N")
        return up_negate(evaluate_exact(e.arg, assignment, domain))
    if domain == "nat" and isinstance(e, Sub):
        raise RegimeError("unrestricted subtraction is not available over N")
    left = evaluate_exact(e.left, assignment, domain)
    right = evaluate_exact(e.right, assignment, domain)
    return up_binary(_OPS[type(e)], left, right)


def window_of_upset(s: UPSet, w: Window) -> WindowSet:
    """Window image of an exact set, with its exact support (sound horizon: whole window)."""
    ws = up_enumerate(s, w)
    return WindowSet(w, ws.bits, None, EMPTY_SUPPORT if s.is_empty else s.bounds())
