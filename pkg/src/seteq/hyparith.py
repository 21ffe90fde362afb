"""Finite effective sigma-ring instances and their eight-constraint system.

A spec gives finite tables for ``tau1``, ``tau2`` and the functions
``f_k``. Leaves are ``B_{tau1(k)} = N \\ {k}``, ``C_{tau1(k)} = {k}``;
inner nodes are ``B_{tau2(k)} = U_n C_{f_k(n)}`` and
``C_{tau2(k)} = n_n B_{f_k(n)}``. Nodes of the tree of ``B_{i0}`` are
addressed by strings ``1 x_k 1 ... 1 x_1 1 0 w`` with ``x_i`` in ``{3,6}*``.

Spec file lines::

    tau1 e -> v
    tau2 e -> v
    f e n -> v        # one table entry
    f e * -> v        # value for every n not listed
    f e total         # f_e is total (needs a '*' entry)
    root i0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .digits import bin36_encode, bin36_value, rep7, val7
from .numset import EMPTY, NAT, UPSet, Window, WindowSet, up_binary, up_complement
from .eqsys.ast import Const, Equation, Inclusion, Intersect, Oracle, System, TruncSub, Union, Var, union_all
from .eqsys.evaluate import evaluate_windowed
from .gadgets import E_expr, appendthreesix_expr, chain, oracle_append, pattern, removeone_expr


class SpecError(ValueError):
    """Malformed or inconsistent sigma-ring spec, or a needed entry is missing."""


@dataclass(frozen=True)
class FTable:
    entries: tuple[tuple[int, int], ...] = ()
    default: int | None = None
    total: bool = False

    def __call__(self, n: int) -> int | None:
        for k, v in self.entries:
            if k == n:
                return v
        return self.default

    def values(self) -> set[int]:
        """Distinct values taken (all of them if the default is used somewhere)."""
        vals = {v for _, v in self.entries}
        if self.default is not None:
            vals.add(self.default)
        return vals

    def smallest_arguments(self) -> dict[int, int]:
        """For each value, the smallest argument producing it."""
        out: dict[int, int] = {}
        for k, v in sorted(self.entries):
            out.setdefault(v, k)
        if self.default is not None:
            listed = {k for k, _ in self.entries}
            n = 0
            while n in listed:
                n += 1
            out[self.default] = min(out.get(self.default, n), n)
        return out


@dataclass(frozen=True)
class SigmaRingSpec:
    tau1: tuple[tuple[int, int], ...]
    tau2: tuple[tuple[int, int], ...]
    f: tuple[tuple[int, FTable], ...]
    root: int

    def __post_init__(self):
        for name, table in (("tau1", self.tau1), ("tau2", self.tau2)):
            vals = [v for _, v in table]
            if len(set(vals)) != len(vals):
                raise SpecError(f"{name} is not one-to-one")
            keys = [k for k, _ in table]
            if len(set(keys)) != len(keys):
                raise SpecError(f"{name} lists an argument twice")
        both = {v for _, v in self.tau1} & {v for _, v in self.tau2}
        if both:
            raise SpecError(f"tau1 and tau2 images overlap at {min(both)}")
        for k, t in self.f:
            if t.total and t.default is None:
                raise SpecError(f"f {k} is declared total but has no '*' entry")

    @property
    def tau1_inv(self) -> dict[int, int]:
        return {v: k for k, v in self.tau1}

    @property
    def tau2_inv(self) -> dict[int, int]:
        return {v: k for k, v in self.tau2}

    def ftable(self, k: int) -> FTable | None:
        for key, t in self.f:
            if key == k:
                return t
        return None


# -- spec files -------------------------------------------------------------------

_LINE = [
    ("tau1", re.compile(r"tau1\s+(\d+)\s*->\s*(\d+)")),
    ("tau2", re.compile(r"tau2\s+(\d+)\s*->\s*(\d+)")),
    ("f", re.compile(r"f\s+(\d+)\s+(\d+|\*)\s*->\s*(\d+)")),
    ("total", re.compile(r"f\s+(\d+)\s+total")),
    ("root", re.compile(r"root\s+(\d+)")),
]


def parse_spec(text: str) -> SigmaRingSpec:
    tau1: dict[int, int] = {}
    tau2: dict[int, int] = {}
    entries: dict[int, dict[int, int]] = {}
    defaults: dict[int, int] = {}
    total: set[int] = set()
    root = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for kind, rx in _LINE:
            m = rx.fullmatch(line)
            if m:
                break
        else:
            raise SpecError(f"line {no}: cannot parse {line!r}")
        g = m.groups()
        if kind in ("tau1", "tau2"):
            table = tau1 if kind == "tau1" else tau2
            if int(g[0]) in table:
                raise SpecError(f"line {no}: {kind} {g[0]} given twice")
            table[int(g[0])] = int(g[1])
        elif kind == "f":
            e = int(g[0])
            if g[1] == "*":
                defaults[e] = int(g[2])
            else:
                entries.setdefault(e, {})[int(g[1])] = int(g[2])
        elif kind == "total":
            total.add(int(g[0]))
        else:
            root = int(g[0])
    if root is None:
        raise SpecError("missing 'root' line")
    ks = sorted(set(entries) | set(defaults) | total)
    f = tuple((k, FTable(tuple(sorted(entries.get(k, {}).items())), defaults.get(k), k in total)) for k in ks)
    return SigmaRingSpec(tuple(sorted(tau1.items())), tuple(sorted(tau2.items())), f, root)


def load_spec(path) -> SigmaRingSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def format_spec(spec: SigmaRingSpec) -> str:
    lines = [f"tau1 {k} -> {v}" for k, v in spec.tau1]
    lines += [f"tau2 {k} -> {v}" for k, v in spec.tau2]
    for k, t in spec.f:
        lines += [f"f {k} {n} -> {v}" for n, v in t.entries]
        if t.default is not None:
            lines.append(f"f {k} * -> {t.default}")
        if t.total:
            lines.append(f"f {k} total")
    lines.append(f"root {spec.root}")
    return "\n".join(lines) + "\n"


# -- tree -----------------------------------------------------------------------------

def resolve(spec: SigmaRingSpec, path: Sequence[str]) -> int | None:
    """Index at the end of a path of ``{3,6}``-strings, or None when undefined."""
    i = spec.root
    inv = spec.tau2_inv
    for x in path:
        k = inv.get(i)
        if k is None:
            return None
        t = spec.ftable(k)
        if t is None:
            return None
        i = t(bin36_value(x))
        if i is None:
            return None
    return i


def children(spec: SigmaRingSpec, i: int) -> set[int]:
    k = spec.tau2_inv.get(i)
    t = spec.ftable(k) if k is not None else None
    return t.values() if t is not None else set()


@dataclass(frozen=True)
class WellFounded:
    ok: bool
    cycle: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_well_founded(spec: SigmaRingSpec) -> WellFounded:
    """Depth-first search for a cycle among the indices reachable from the root."""
    state: dict[int, int] = {}
    stack: list[int] = []

    def visit(i: int) -> tuple[int, ...] | None:
        state[i] = 1
        stack.append(i)
        for c in sorted(children(spec, i)):
            if state.get(c) == 1:
                return tuple(stack[stack.index(c):]) + (c,)
            if c not in state:
                found = visit(c)
                if found:
                    return found
        stack.pop()
        state[i] = 2
        return None

    cyc = visit(spec.root)
    return WellFounded(cyc is None, cyc or ())


class RingSets:
    """Exact ``B_e``/``C_e`` by memoized recursion over a well-founded spec."""

    def __init__(self, spec: SigmaRingSpec):
        wf = check_well_founded(spec)
        if not wf:
            raise SpecError(f"spec is not well-founded: cycle {' -> '.join(map(str, wf.cycle))}")
        self.spec = spec
        self._memo: dict[int, tuple[UPSet, UPSet]] = {}

    def defined(self, i: int) -> bool:
        if i in self.spec.tau1_inv:
            return True
        k = self.spec.tau2_inv.get(i)
        t = self.spec.ftable(k) if k is not None else None
        return t is not None and t.total

    def pair(self, i: int) -> tuple[UPSet, UPSet]:
        if i in self._memo:
            return self._memo[i]
        spec = self.spec
        if i in spec.tau1_inv:
            k = spec.tau1_inv[i]
            c = UPSet.finite([k])
            out = (up_complement(c, "nat"), c)
        else:
            k = spec.tau2_inv.get(i)
            if k is None:
                raise SpecError(f"index {i} is in neither image of tau1 nor tau2")
            t = spec.ftable(k)
            if t is None or not t.total:
                raise SpecError(f"B_{i} needs f {k} to be declared total")
            b, c = EMPTY, NAT
            for j in sorted(t.values()):
                bj, cj = self.pair(j)
                b = up_binary("union", b, cj)
                c = up_binary("intersect", c, bj)
            out = (b, c)
        self._memo[i] = out
        return out

    def B(self, i: int) -> UPSet:
        return self.pair(i)[0]

    def C(self, i: int) -> UPSet:
        return self.pair(i)[1]

    def child_union_C(self, i: int) -> UPSet:
        """Union of ``C`` over the defined children (``B_i`` when ``f`` is total)."""
        out = EMPTY
        for j in sorted(children(self.spec, i)):
            if self.defined(j):
                out = up_binary("union", out, self.C(j))
        return out


# -- addresses ---------------------------------------------------------------------

def parse_address(n: int) -> tuple[tuple[str, ...], str] | None:
    """``(path x_1..x_k, w)`` for ``rep7(n) = 1 x_k 1 ... 1 x_1 1 0 w``, else None."""
    if n <= 0:
        return None
    r = rep7(n)
    if r[0] != "1":
        return None
    blocks, pos = [], 1
    while pos < len(r) and r[pos] != "0":
        start = pos
        while pos < len(r) and r[pos] in "36":
            pos += 1
        if pos >= len(r) or r[pos] != "1":
            return None
        blocks.append(r[start:pos])
        pos += 1
    if pos >= len(r):
        return None
    return tuple(reversed(blocks)), r[pos + 1:]


def address(path: Sequence[str], w: str) -> int:
    return val7("1" + "".join(x + "1" for x in reversed(path)) + "0" + w)


@dataclass
class GoalBundle:
    """Goal0, Goal1, Admissible, R0, R1 and the auxiliary Y, Yt, Z on a window."""

    window: Window
    sets: dict[str, set[int]] = field(repr=False)

    NAMES = ("Goal0", "Goal1", "Admissible", "R0", "R1", "Y", "Yt", "Z")

    def __getitem__(self, name: str) -> set[int]:
        return self.sets[name]

    def window_set(self, name: str) -> WindowSet:
        return WindowSet.from_iterable(self.window, sorted(self.sets[name]))

    def assignment(self) -> dict[str, WindowSet]:
        """Values for the variables of :func:`build_HA_system`."""
        m = {"X0": "Goal0", "X1": "Goal1", "Y": "Y", "Yt": "Yt", "Z": "Z"}
        return {v: self.window_set(k) for v, k in m.items()}


def _walk(spec: SigmaRingSpec, hi: int):
    """Yield ``(prefix string, index)`` for every ``1 (x 1)*`` prefix fitting below ``hi``."""
    ndig = len(rep7(hi))
    inv = spec.tau2_inv

    def rec(prefix: str, i: int | None):
        yield prefix, i
        room = ndig - len(prefix) - 2  # leave room for "1" and "0"
        if room < 0:
            return
        for m in range(room + 1):
            for bits in range(2**m):
                x = format(bits, f"0{m}b").replace("0", "3").replace("1", "6") if m else ""
                if i is None:
                    j = None
                else:
                    k = inv.get(i)
                    t = spec.ftable(k) if k is not None else None
                    j = t(bin36_value(x)) if t is not None else None
                p = x + "1"
                if val7(prefix + p + "0") <= hi:
                    yield from rec(prefix[:1] + p + prefix[1:], j)

    yield from rec("1", spec.root)


def compute_goal_bundle(spec: SigmaRingSpec, window: Window | int) -> GoalBundle:
    """Exact Goal/Admissible/R sets and the lemma's Y, Yt, Z, cut to the window."""
    if isinstance(window, int):
        window = Window.digits(window)
    hi = window.hi
    rs = RingSets(spec)
    out = {k: set() for k in GoalBundle.NAMES}
    tilde_base: set[int] = set()
    for prefix, i in _walk(spec, hi):
        head = val7(prefix + "0")
        if head > hi:
            continue
        if i is not None and not rs.defined(i):
            if spec.tau2_inv.get(i) is None:
                raise SpecError(f"reachable index {i} is in neither image of tau1 nor tau2")
        leaf = i is not None and i in spec.tau1_inv
        for length in range(0, len(rep7(hi)) - len(prefix)):
            base = head * 7**length
            if base > hi:
                break
            count = min(7**length, hi - base + 1)
            for v in range(count):
                n = base + v
                if i is None:
                    continue
                out["Admissible"].add(n)
                if not rs.defined(i):
                    continue
                b, c = rs.pair(i)
                if v in b:
                    out["Goal0"].add(n)
                    if leaf:
                        out["R0"].add(n)
                else:
                    out["Goal1"].add(n)
                    if leaf:
                        out["R1"].add(n)
                    else:
                        out["Z"].add(n)
        if i is not None and not leaf:
            u = rs.child_union_C(i)
            for length in range(0, len(rep7(hi)) - len(prefix)):
                base = head * 7**length
                if base > hi:
                    break
                for v in range(min(7**length, hi - base + 1)):
                    if v in u:
                        tilde_base.add(base + v)
    out["Y"] = oracle_append(out["Z"], window)
    out["Yt"] = oracle_append(tilde_base, window)
    return GoalBundle(window, out)


# -- system ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _bundle_cached(spec: SigmaRingSpec, hi: int) -> GoalBundle:
    return compute_goal_bundle(spec, Window(0, hi))


def _set_oracle(spec: SigmaRingSpec, name: str) -> Oracle:
    rs = RingSets(spec)

    def pred(n: int) -> bool:
        a = parse_address(n)
        if a is None:
            return False
        i = resolve(spec, a[0])
        if i is None:
            return False
        if name == "Admissible":
            return True
        if i not in spec.tau1_inv:
            return False
        return (val7(a[1]) in rs.B(i)) == (name == "R0")

    def vec(arr: np.ndarray) -> np.ndarray:
        hi = max(int(arr.max()), 7) if arr.size else 7
        members = _bundle_cached(spec, hi)[name]
        return np.isin(arr, np.fromiter(members, dtype=np.int64, count=len(members)))

    return Oracle(name, pred, (0, float("inf")), vec)


def build_HA_system(spec: SigmaRingSpec) -> System:
    """The eight constraints over ``X0, X1, Y, Yt, Z``.

    Conditions made of several relations become one equivalent constraint:
    a chain ``a ⊆ b ⊆ c`` as ``a ∪ b ⊆ b ∩ c``, ``X0, X1 ⊆ Adm`` as
    ``X0 ∪ X1 ⊆ Adm`` and the two empty intersections as one empty union.
    """
    RingSets(spec)
    adm = Const("Admissible", _set_oracle(spec, "Admissible"))
    r0 = Const("R0", _set_oracle(spec, "R0"))
    r1 = Const("R1", _set_oracle(spec, "R1"))
    X0, X1, Y, YT, Z = (Var(v) for v in ("X0", "X1", "Y", "Yt", "Z"))
    e_rem = E_expr(removeone_expr(X1))
    cs = (
        Equation(X0, Union(e_rem, r0)),
        Equation(X1, Union(Z, r1)),
        Equation(YT, Union(e_rem, appendthreesix_expr(YT))),
        Equation(Y, Union(Z, appendthreesix_expr(Y))),
        chain(Y, removeone_expr(Intersect(X0, adm)), Union(Y, YT)),
        Inclusion(Z, Const("ONEWP", pattern("1 W W*"))),
        Inclusion(Union(X0, X1), adm),
        Equation(Union(Intersect(X0, r1), Intersect(X1, r0)), Const("EMPTY", EMPTY)),
    )
    return System("nat", ("X0", "X1", "Y", "Yt", "Z"), cs, "X0")


def witness_length(spec: SigmaRingSpec) -> int:
    """Longest shortest ``{3,6}``-witness needed to pick a child of a reachable node."""
    best = 0
    seen, todo = set(), [spec.root]
    while todo:
        i = todo.pop()
        if i in seen:
            continue
        seen.add(i)
        k = spec.tau2_inv.get(i)
        t = spec.ftable(k) if k is not None else None
        if t is None:
            continue
        for n in t.smallest_arguments().values():
            best = max(best, len(bin36_encode(n)))
        todo += sorted(t.values())
    return best


def check_HA(spec: SigmaRingSpec, digits: int = 5, pad: int | None = None):
    """Check the bundle against :func:`build_HA_system` on a padded window.

    The bundle is computed on ``digits + pad`` digits and evaluated with
    truncating semantics; verdicts compare only the first ``digits`` digits,
    where every needed witness fits inside the padded window.
    """
    from .eqsys.solve import check_solution

    if pad is None:
        pad = 1 + witness_length(spec)
    big = Window.digits(digits + pad)
    bundle = _bundle_cached(spec, big.hi)
    report = check_solution(build_HA_system(spec), bundle.assignment(), big, "truncated",
                            region=(0, 7**digits - 1))
    return report, bundle


# -- target extraction ------------------------------------------------------------

def remove10_expr(x) -> object:
    """``{<w> : <10w> in X}`` for ``w`` empty or not starting with 0.

    Stripping two leading digits keeps the length parity, so the guards
    work with lengths modulo 3.
    """
    head = Intersect(TruncSub(x, Const("SEVEN", UPSet.finite([7]))), Const("ZERO", UPSet.finite([0])))
    terms = [head]
    for i in range(1, 7):
        for t in range(3):
            tail = "W " * t + "(W W W)*"
            guard = Const(f"M10{i}_{t}", pattern(f"1 0 {i} {tail}"))
            land = Const(f"M{i}_{t}", pattern(f"{i} {tail}"))
            terms.append(Intersect(TruncSub(Intersect(x, guard), Const("TEN00", pattern("1 0 0*"))), land))
    return union_all(terms)


def oracle_remove10(s) -> set[int]:
    out = set()
    for n in s:
        r = rep7(n) if n > 0 else ""
        if r.startswith("10") and (len(r) == 2 or r[2] != "0"):
            out.add(val7(r[2:]))
    return out


def extract_target(bundle: GoalBundle | WindowSet, window: Window | None = None) -> WindowSet:
    """``B_{i0}`` read off ``X0 = Goal0``, exact on ``[0, 7^(d-2) - 1]`` for a ``d``-digit window."""
    x = bundle.window_set("Goal0") if isinstance(bundle, GoalBundle) else bundle
    w = window or x.window
    out = evaluate_windowed(remove10_expr(Var("X")), {"X": x}, w, "nat", "truncated")
    d = len(rep7(w.hi))
    hz = (0, 7 ** max(d - 2, 0) - 1)
    bits = out.restrict_bits(*hz)
    return WindowSet(w, bits, hz, (0, float("inf")))


def target_direct(spec: SigmaRingSpec, window: Window) -> set[int]:
    """``B_{i0}`` on the extraction horizon, by direct recursion."""
    b = RingSets(spec).B(spec.root)
    d = len(rep7(window.hi))
    return set(b.elements_in(0, 7 ** max(d - 2, 0) - 1))
