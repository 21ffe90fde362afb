"""Fixed-point solving, solution checking and exhaustive search."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..numset import INF, UPSet, Window, WindowSet, bits_to_indices, up_binary, up_complement
from .ast import (Add, Const, Equation, Expr, Inclusion, Intersect, Negate, Sub, System, SystemError_,
                  TruncSub, Union, Var)
from .evaluate import EMPTY_SUPPORT, RegimeError, _nat_bits, const_window, evaluate_exact, evaluate_windowed

SATISFIED = "satisfied"
VIOLATED = "violated"
UNKNOWN = "unknown-beyond-horizon"

BRUTE_MAX_SIZE = 17
BRUTE_MAX_VARS = 3
BRUTE_MAX_BITS = 24
_CHUNK = 1 << 20


class SolveError(ValueError):
    """System outside the solver's preconditions (unresolved, non-monotone, too large)."""


@dataclass
class ConstraintVerdict:
    index: int
    kind: str
    status: str
    witness: int | None = None
    horizon: tuple | None = None


@dataclass
class SolveReport:
    status: str
    regime: str
    verdicts: list[ConstraintVerdict] = field(default_factory=list)
    horizons: dict[str, tuple] = field(default_factory=dict)
    iterations: int = 0
    mode: str | None = None
    window: tuple[int, int] | None = None

    @property
    def ok(self) -> bool:
        return self.status == SATISFIED

    def records(self) -> list[dict]:
        head = {"record": "report", "status": self.status, "regime": self.regime, "mode": self.mode,
                "window": list(self.window) if self.window else None, "iterations": self.iterations}
        out = [head]
        out += [{"record": "constraint", **_jsonable(asdict(v))} for v in self.verdicts]
        out += [{"record": "horizon", "var": k, "horizon": _jsonable(list(h))} for k, h in self.horizons.items()]
        return out

    def summary(self) -> str:
        lines = [f"status: {self.status} (regime {self.regime}"
                 + (f", mode {self.mode}" if self.mode else "")
                 + (f", window [{self.window[0]}, {self.window[1]}]" if self.window else "")
                 + (f", {self.iterations} iterations" if self.iterations else "") + ")"]
        for v in self.verdicts:
            extra = f" witness {v.witness}" if v.witness is not None else ""
            hor = f" on {list(v.horizon)}" if v.horizon is not None else ""
            lines.append(f"  constraint {v.index + 1} ({v.kind}): {v.status}{hor}{extra}")
        for k, h in self.horizons.items():
            lines.append(f"  horizon {k}: {list(h) if h[0] <= h[1] else 'empty'}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and x in (INF, -INF):
        return "inf" if x > 0 else "-inf"
    return x


def _overall(verdicts: list[ConstraintVerdict]) -> str:
    st = {v.status for v in verdicts}
    return VIOLATED if VIOLATED in st else UNKNOWN if UNKNOWN in st else SATISFIED


def _kind(c) -> str:
    return "eq" if isinstance(c, Equation) else "sub"


# -- checking -----------------------------------------------------------------

def up_witness(s: UPSet) -> int | None:
    """Element of ``s`` of least absolute value (ties go to the negative one)."""
    if s.is_empty:
        return None
    cands = list(s.exceptions)
    for t, sign in ((s.pos, 1), (s.neg, -1)):
        for r in t.residues:
            cands.append(sign * (t.threshold + (r - t.threshold) % t.period))
    return min(cands, key=lambda n: (abs(n), n))


def _check_exact(s: System, a: dict[str, UPSet]) -> SolveReport:
    verdicts = []
    for i, c in enumerate(s.constraints):
        lhs = evaluate_exact(c.lhs, a, s.domain)
        rhs = evaluate_exact(c.rhs, a, s.domain)
        bad = up_binary("intersect", lhs, up_complement(rhs))
        if isinstance(c, Equation):
            bad = up_binary("union", bad, up_binary("intersect", rhs, up_complement(lhs)))
        w = up_witness(bad)
        verdicts.append(ConstraintVerdict(i, _kind(c), SATISFIED if w is None else VIOLATED, w))
    return SolveReport(_overall(verdicts), "exact", verdicts)


def _check_windowed(s: System, a: dict[str, WindowSet], window: Window, regime: str,
                    indices=None, region=None) -> list[ConstraintVerdict]:
    verdicts = []
    for i, c in enumerate(s.constraints):
        if indices is not None and i not in indices:
            continue
        lhs = evaluate_windowed(c.lhs, a, window, s.domain, regime)
        rhs = evaluate_windowed(c.rhs, a, window, s.domain, regime)
        x = max(lhs.horizon[0], rhs.horizon[0])
        y = min(lhs.horizon[1], rhs.horizon[1])
        if region is not None:
            x, y = max(x, region[0]), min(y, region[1])
        if x > y:
            verdicts.append(ConstraintVerdict(i, _kind(c), UNKNOWN, None, None))
            continue
        diff = lhs.bits & ~rhs.bits
        if isinstance(c, Equation):
            diff |= rhs.bits & ~lhs.bits
        diff = (diff >> (x - window.lo)) & ((1 << (y - x + 1)) - 1)
        if diff:
            low = (diff & -diff).bit_length() - 1
            verdicts.append(ConstraintVerdict(i, _kind(c), VIOLATED, x + low, (x, y)))
        else:
            verdicts.append(ConstraintVerdict(i, _kind(c), SATISFIED, None, (x, y)))
    return verdicts


def check_solution(s: System, assignment: dict, window: Window | None = None,
                   regime: str | None = None, region: tuple[int, int] | None = None) -> SolveReport:
    """Check every constraint of ``s`` under ``assignment``.

    With UPSet values the check is exact. With WindowSet values each
    constraint is compared on the intersection of both sides' horizons
    (``regime`` ``horizon``, the default) or on the whole window with
    truncating semantics (``truncated``). ``region`` further restricts the
    comparison, e.g. to the unpadded part of a padded window.
    """
    missing = set(s.variables) - set(assignment)
    if missing:
        raise SystemError_(f"assignment misses variable(s) {sorted(missing)}")
    if regime is None:
        regime = "exact" if all(isinstance(v, UPSet) for v in assignment.values()) else "horizon"
    if regime == "exact":
        return _check_exact(s, assignment)
    if window is None:
        window = next(iter(assignment.values())).window
    verdicts = _check_windowed(s, assignment, window, regime, region=region)
    hz = {k: assignment[k].horizon for k in s.variables}
    return SolveReport(_overall(verdicts), regime, verdicts, hz, window=(window.lo, window.hi))


# -- Kleene iteration -----------------------------------------------------------

def check_monotone(e: Expr) -> None:
    """Raise :class:`SolveError` unless ``e`` is monotone in its variables.

    All operators are monotone except in the subtrahend of ``Sub`` and
    ``TruncSub``, which must therefore be variable-free.
    """
    for node in e.walk():
        if isinstance(node, (Sub, TruncSub)) and node.right.variables():
            raise SolveError("non-monotone right-hand side: a variable occurs in a subtrahend")


def _default_support(domain: str):
    return (0, INF) if domain == "nat" else (-INF, INF)


def least_supports(s: System, defs: dict[str, Expr], w: Window, widen_after: int = 8) -> dict[str, tuple]:
    """Intervals containing the least solution, by interval iteration with widening."""
    sup = {x: EMPTY_SUPPORT for x in s.variables}
    rounds = 0
    while True:
        probe = {x: WindowSet(w, 0, None, sup[x]) for x in s.variables}
        new = {x: evaluate_windowed(defs[x], probe, w, s.domain, "horizon").support for x in s.variables}
        if new == sup:
            return sup
        rounds += 1
        if rounds > widen_after:
            for x in s.variables:
                a, b = sup[x], new[x]
                if a[0] > a[1] or b[0] > b[1]:
                    continue
                new[x] = (-INF if b[0] < a[0] else b[0], INF if b[1] > a[1] else b[1])
        sup = new


def _var_horizons(s: System, defs: dict[str, Expr], w: Window, sup: dict[str, tuple],
                  max_rounds: int = 64) -> dict[str, tuple]:
    """Greatest family of variable horizons stable under the definitions."""
    full = (w.lo, w.hi)
    hz = {x: full for x in s.variables}
    for _ in range(max_rounds):
        probe = {x: WindowSet(w, 0, hz[x], sup[x]) for x in s.variables}
        changed = False
        for x, rhs in defs.items():
            h = evaluate_windowed(rhs, probe, w, s.domain, "horizon").horizon
            new = (max(hz[x][0], h[0]), min(hz[x][1], h[1]))
            if new[0] > new[1]:
                new = (w.lo + 1, w.lo)
            if new != hz[x]:
                hz[x] = new
                changed = True
        if not changed:
            return hz
    return {x: (h if h == full else (w.lo + 1, w.lo)) for x, h in hz.items()}


def kleene_solve(s: System, window: Window, mode: str = "least", regime: str = "horizon",
                 max_steps: int | None = None, trace: list | None = None) -> tuple[dict[str, WindowSet], SolveReport]:
    """Least or greatest fixed point of a resolved monotone system on ``window``.

    Iteration starts from all-empty (``least``) or the full window
    (``greatest``, the non-negative part over N) and applies every definition
    simultaneously until nothing changes. In the ``horizon`` regime each
    variable's result is certified on its horizon; in ``greatest`` mode the
    certified value is the limit of the descending iterates, which contains
    the greatest solution. Constraints that are not definitions are checked
    on the result. ``trace``, when given, receives the bit vectors of every
    iterate.
    """
    if mode not in ("least", "greatest"):
        raise SolveError(f"unknown mode {mode!r}")
    if regime not in ("horizon", "truncated"):
        raise RegimeError(f"kleene_solve needs a windowed regime, got {regime!r}")
    defs = s.resolved()
    if defs is None:
        raise SolveError("system is not resolved: every variable needs one equation 'X = expr'")
    for rhs in defs.values():
        check_monotone(rhs)
    if s.domain == "nat" and window.lo < 0:
        raise SolveError("windows over N must start at 0 or above")

    if mode == "least" and regime == "horizon":
        sups = least_supports(s, defs, window)
    else:
        sups = {x: _default_support(s.domain) for x in s.variables}
    start = 0
    if mode == "greatest":
        start = window.mask & (_nat_bits(window) if s.domain == "nat" else window.mask)
    hz = _var_horizons(s, defs, window, sups) if regime == "horizon" else {x: (window.lo, window.hi) for x in s.variables}
    cur = {x: start for x in s.variables}
    limit = max_steps if max_steps is not None else window.size * max(1, len(s.variables)) + 2
    steps = 0
    while True:
        if trace is not None:
            trace.append(dict(cur))
        vals = {x: WindowSet(window, cur[x]) for x in s.variables}
        nxt = {x: evaluate_windowed(defs[x], vals, window, s.domain, "truncated").bits for x in s.variables}
        steps += 1
        if nxt == cur:
            break
        if steps > limit:
            raise SolveError(f"no fixed point within {limit} steps (is the system monotone?)")
        cur = nxt

    out = {x: WindowSet(window, cur[x], hz[x], sups[x], unsound=hz[x][0] > hz[x][1]) for x in s.variables}
    side = {i for i, c in enumerate(s.constraints)
            if not (isinstance(c, Equation) and isinstance(c.lhs, Var) and defs.get(c.lhs.name) == c.rhs)}
    verdicts = _check_windowed(s, out, window, regime, side) if side else []
    status = _overall(verdicts)
    if status == SATISFIED and any(h[0] > h[1] for h in hz.values()):
        status = UNKNOWN
    report = SolveReport(status, regime, verdicts, dict(hz), steps, mode, (window.lo, window.hi))
    return out, report


# -- exhaustive search ------------------------------------------------------------

def _batch(e: Expr, vals: dict[str, np.ndarray], w: Window, domain: str, cache: dict) -> np.ndarray:
    """Evaluate ``e`` under truncating semantics for a whole batch of assignments at once."""
    mask = np.uint64(w.mask)
    if isinstance(e, Var):
        return vals[e.name]
    if isinstance(e, Const):
        key = id(e.value)
        if key not in cache:
            cache[key] = np.uint64(const_window(e.value, w).bits)
        return cache[key]
    if isinstance(e, Negate):
        a = _batch(e.arg, vals, w, domain, cache)
        out = np.zeros_like(a)
        for j in range(w.size):
            k = -(j + w.lo) - w.lo
            if 0 <= k < w.size:
                out |= ((a >> np.uint64(j)) & np.uint64(1)) << np.uint64(k)
        return out
    a = _batch(e.left, vals, w, domain, cache)
    b = _batch(e.right, vals, w, domain, cache)
    if isinstance(e, Union):
        return a | b
    if isinstance(e, Intersect):
        return a & b
    sign = 1 if isinstance(e, Add) else -1
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.uint64)
    for i in range(w.size):
        k = sign * (i + w.lo)
        sel = ((b >> np.uint64(i)) & np.uint64(1)).astype(bool)
        if not sel.any():
            continue
        shifted = (a << np.uint64(k)) if k >= 0 else (a >> np.uint64(-k))
        out |= np.where(sel, shifted & mask, np.uint64(0))
    if isinstance(e, TruncSub):
        out &= np.uint64(_nat_bits(w))
    return out & mask


def _satisfying(s: System, w: Window, start: int, stop: int) -> np.ndarray:
    k = np.arange(start, stop, dtype=np.uint64)
    size = np.uint64(w.size)
    mask = np.uint64(w.mask)
    vals = {x: (k >> (size * np.uint64(i))) & mask for i, x in enumerate(s.variables)}
    ok = np.ones(k.shape, dtype=bool)
    cache: dict = {}
    for c in s.constraints:
        lhs = _batch(c.lhs, vals, w, s.domain, cache)
        rhs = _batch(c.rhs, vals, w, s.domain, cache)
        good = (lhs == rhs) if isinstance(c, Equation) else ((lhs & ~rhs) == 0)
        ok &= np.broadcast_to(good, k.shape)
    return k[ok]


_WORK: tuple | None = None


def _work(rng: tuple[int, int]) -> np.ndarray:
    s, w = _WORK
    return _satisfying(s, w, *rng)


def brute_window(universe) -> Window:
    if isinstance(universe, Window):
        return universe
    if isinstance(universe, int):
        return Window(0, universe)
    lo, hi = universe
    return Window(lo, hi)


def brute_force_solutions(s: System, universe, workers: int | None = None) -> list[dict[str, WindowSet]]:
    """Every assignment satisfying ``s`` under truncating semantics.

    ``universe`` is ``u`` (meaning ``{0..u}``), a pair ``(lo, hi)`` or a
    :class:`Window`. The search is exhaustive, so it is capped at
    ``BRUTE_MAX_SIZE`` points, ``BRUTE_MAX_VARS`` variables and
    ``BRUTE_MAX_BITS`` bits in total. Results come in a fixed order.
    """
    w = brute_window(universe)
    nv = len(s.variables)
    if w.size > BRUTE_MAX_SIZE or nv > BRUTE_MAX_VARS or w.size * nv > BRUTE_MAX_BITS:
        raise SolveError(f"brute force cap exceeded: {w.size} points x {nv} variables "
                         f"(limits {BRUTE_MAX_SIZE} points, {BRUTE_MAX_VARS} variables, {BRUTE_MAX_BITS} bits)")
    if s.domain == "nat" and w.lo < 0:
        raise SolveError("universes over N must start at 0 or above")
    total = 1 << (w.size * nv)
    ranges = [(a, min(a + _CHUNK, total)) for a in range(0, total, _CHUNK)]
    if workers and workers > 1 and len(ranges) > 1 and "fork" in _start_methods():
        global _WORK
        import multiprocessing as mp
        _WORK = (s, w)
        try:
            with ProcessPoolExecutor(workers, mp_context=mp.get_context("fork")) as ex:
                found = list(ex.map(_work, ranges))
        finally:
            _WORK = None
    else:
        found = [_satisfying(s, w, *r) for r in ranges]
    hits = np.concatenate(found) if found else np.zeros(0, dtype=np.uint64)
    out = []
    for k in hits.tolist():
        a = {}
        for i, x in enumerate(s.variables):
            bits = (k >> (i * w.size)) & w.mask
            idx = bits_to_indices(bits)
            sup = (int(idx[0]) + w.lo, int(idx[-1]) + w.lo) if idx.size else EMPTY_SUPPORT
            a[x] = WindowSet(w, bits, None, sup)
        out.append(a)
    return out


def _start_methods() -> list[str]:
    import multiprocessing as mp
    return mp.get_all_start_methods() if os.name == "posix" else []
