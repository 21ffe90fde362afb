"""Digit-manipulating expressions and systems, with definitional oracles.

Numbers are read through their base-7 notation. The gadgets strip a
leading ``1`` (``removeone``), evaluate an existential quantifier over a
leading ``{3,6}*`` block (``E``), prepend every ``{3,6}*`` block
(``appendthreesix``), and evaluate a universal quantifier through a small
system (``A``). ``build_arith`` chains them over a quantifier prefix.

Oracles work on plain Python sets and on windows: universal statements
range over the witnesses that fit in the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

from .digits import DigitPattern, compile_pattern, rep7, val7
from .numset import EMPTY, UPSet, Window, WindowSet
from .eqsys.ast import (Add, Const, Equation, Expr, Inclusion, Intersect, Oracle, System, TruncSub, Union, Var,
                        substitute, union_all)
from .eqsys.evaluate import const_window, evaluate_windowed

DOMAIN_E = "[36]* 1 W*"


class GadgetError(ValueError):
    """Input outside a gadget's admissible domain or precondition."""


@lru_cache(maxsize=None)
def pattern(src: str) -> DigitPattern:
    return compile_pattern(src)


def _c(name: str, src: str) -> Const:
    return Const(name, pattern(src))


def _up(name: str, elems) -> Const:
    return Const(name, UPSet.finite(elems))


@dataclass(frozen=True)
class GadgetExpr:
    """An expression in one input variable together with its input domain.

    ``domain`` is the admissible input set, ``shrink`` the number of digits
    lost between input window and certified output, ``oracle`` the
    definitional reference on finite sets.
    """

    name: str
    expr: Expr
    domain: DigitPattern
    oracle: Callable[[set[int]], set[int]] = field(compare=False)
    shrink: int = 1
    var: str = "X"

    def __call__(self, arg: Expr) -> Expr:
        return substitute(self.expr, {self.var: arg})

    def evaluate(self, x: WindowSet, regime: str = "horizon") -> WindowSet:
        return evaluate_windowed(self.expr, {self.var: x}, x.window, "nat", regime)

    def admissible(self, elems: Iterable[int]) -> bool:
        return all(self.domain.member(n) for n in elems)


# -- removeone -----------------------------------------------------------------

def removeone_expr(x: Expr) -> Expr:
    head = Intersect(TruncSub(x, _up("ONE", [1])), _up("ZERO", [0]))
    terms = [head]
    for i in range(1, 7):
        for t in (0, 1):
            tail = "W " * t + "(W W)*"
            guard = _c(f"L1{i}_{t}", f"1 {i} {tail}")
            land = _c(f"L{i}_{t}", f"{i} {tail}")
            terms.append(Intersect(TruncSub(Intersect(x, guard), _c("TEN0", "1 0*")), land))
    return union_all(terms)


def oracle_removeone(s: Iterable[int]) -> set[int]:
    """``{<w> : <1w> in s}`` for ``w`` empty or not starting with 0."""
    out = set()
    for n in s:
        if n <= 0:
            continue
        r = rep7(n)
        if r[0] == "1" and (len(r) == 1 or r[1] != "0"):
            out.add(val7(r[1:]))
    return out


def build_removeone() -> GadgetExpr:
    return GadgetExpr("removeone", removeone_expr(Var("X")), pattern("1 | 1 [123456] W*"), oracle_removeone)


# -- E -----------------------------------------------------------------------------

def E_expr(x: Expr) -> Expr:
    one_w = _c("ONEW", "1 W*")
    direct = Intersect(x, one_w)
    shifted = TruncSub(Intersect(x, _c("XP1W", "[36]+ 1 W*")), _c("XP0", "[36]+ 0*"))
    return Union(direct, Intersect(shifted, one_w))


def _split36(n: int) -> tuple[str, str] | None:
    """``(x, 1w)`` for ``rep7(n) = x1w`` with ``x`` in ``{3,6}*``."""
    if n <= 0:
        return None
    r = rep7(n)
    k = 0
    while k < len(r) and r[k] in "36":
        k += 1
    if k < len(r) and r[k] == "1":
        return r[:k], r[k:]
    return None


def oracle_E(s: Iterable[int]) -> set[int]:
    """``{<1w> : <x1w> in s for some x in {3,6}*}``."""
    out = set()
    for n in s:
        p = _split36(n)
        if p is not None:
            out.add(val7(p[1]))
    return out


def build_E() -> GadgetExpr:
    return GadgetExpr("E", E_expr(Var("X")), pattern(DOMAIN_E), oracle_E, shrink=0)


# -- appendthreesix ----------------------------------------------------------

def appendthreesix_expr(y: Expr) -> Expr:
    terms = []
    for i in (3, 6):
        for j in (3, 6):
            inner = Intersect(Add(Intersect(y, _c(f"D{j}W", f"{j} W*")), _c("TWO0", "2 0*")), _c(f"D2{j}W", f"2 {j} W*"))
            terms.append(Intersect(Add(inner, _c(f"D{i - 2}0", f"{i - 2} 0*")), _c(f"D{i}{j}W", f"{i} {j} W*")))
    for i in (3, 6):
        terms.append(Intersect(Add(Intersect(y, _c("ONEW", "1 W*")), _c(f"D{i}0", f"{i} 0*")),
                               _c(f"D{i}1W", f"{i} 1 W*")))
    return union_all(terms)


def _prefixed(base: Iterable[int], hi: int) -> set[int]:
    """Every ``<x r>`` with ``x`` in ``{3,6}*`` and ``<r>`` in ``base``, up to ``hi``."""
    out, todo = set(), [n for n in base if 0 < n <= hi]
    while todo:
        n = todo.pop()
        if n in out:
            continue
        out.add(n)
        scale = 7 ** len(rep7(n))
        for d in (3, 6):
            m = d * scale + n
            if m <= hi:
                todo.append(m)
    return out


def oracle_append(x: Iterable[int], window: Window) -> set[int]:
    """``{<x1w> : x in {3,6}*, <1w> in X}`` on the window."""
    seeds = [n for n in x if _split36(n) is not None and _split36(n)[0] == ""]
    return {n for n in _prefixed(seeds, window.hi) if n >= window.lo}


def build_appendthreesix(seed, name: str = "X0") -> System:
    """System ``Y = X ∪ appendthreesix(Y)`` for a constant seed ``X ⊆ <1 W*>``."""
    c = seed if isinstance(seed, Const) else Const(name, seed)
    v = c.value
    if isinstance(v, UPSet):
        bad = not v.is_finite or any(n not in pattern("1 W*") for n in v.exceptions)
    elif isinstance(v, DigitPattern):
        bad = not _empty_lang(v - pattern("1 W*"))
    else:
        bad = False
    if bad:
        raise GadgetError("appendthreesix seed must lie in <1 W*>")
    y = Var("Y")
    return System("nat", ("Y",), (Equation(y, Union(c, appendthreesix_expr(y))),), "Y")


def _empty_lang(p: DigitPattern) -> bool:
    return p.min_len is None


# -- A ---------------------------------------------------------------------------------

def _as_expr(v, name: str) -> Expr:
    return v if isinstance(v, Expr) else Const(name, v)


def chain(a: Expr, b: Expr, c: Expr) -> Inclusion:
    """``a ⊆ b ⊆ c`` as the single equivalent inclusion ``a ∪ b ⊆ b ∩ c``."""
    return Inclusion(Union(a, b), Intersect(b, c))


def A_constraints(s: Expr, st: Expr, y: str = "Y", yt: str = "Yt", z: str = "Z") -> list:
    """The four constraints of the universal-quantifier system."""
    Y, YT, Z = Var(y), Var(yt), Var(z)
    return [
        Equation(Y, Union(Z, appendthreesix_expr(Y))),
        Equation(YT, Union(E_expr(st), appendthreesix_expr(YT))),
        Inclusion(Z, _c("ONEWP", "1 W W*")),
        chain(Y, s, Union(Y, YT)),
    ]


def build_A(s, st) -> System:
    """System whose unique solution has ``Z = A(S)``; ``S``/``S~`` may be values or expressions."""
    cs = A_constraints(_as_expr(s, "S"), _as_expr(st, "St"))
    return System("nat", ("Y", "Yt", "Z"), tuple(cs), "Z")


def oracle_A(s: Iterable[int] | Callable[[int], bool], window: Window) -> set[int]:
    """``{<1w> : w nonempty, <x1w> in s for every x whose <x1w> fits in the window}``."""
    member = s if callable(s) else set(s).__contains__
    out = set()
    scale = 7
    while scale <= window.hi:
        for n in range(max(scale, window.lo), min(2 * scale, window.hi + 1)):
            if all(member(m) for m in _prefixed([n], window.hi)):
                out.add(n)
        scale *= 7
    return out


def oracle_A_solution(s: Iterable[int], st: Iterable[int], window: Window) -> dict[str, set[int]]:
    """The claimed solution ``(Y, Yt, Z)`` of the A-system, on the window."""
    s = {n for n in s if n in window}
    z = oracle_A(s, window)
    return {"Z": z, "Y": oracle_append(z, window), "Yt": oracle_append(oracle_E(st), window)}


def check_A_precondition(s: set[int], st: set[int], window: Window) -> list[str]:
    """Violations of the A-system precondition visible on the window (empty list if none)."""
    problems = []
    for n in sorted(s | st):
        if _split36(n) is None:
            problems.append(f"{n} = <{rep7(n)}> is outside <[36]* 1 W*>")
            break
    both = s & st
    if both:
        problems.append(f"S and S~ share {min(both)}")
    for n in sorted(s):
        p = _split36(n)
        if p is None:
            continue
        for m in _prefixed([val7(p[1])], window.hi):
            if m not in s and m not in st:
                problems.append(f"<{rep7(n)}> in S but <{rep7(m)}> in neither S nor S~")
                return problems
    return problems


@dataclass
class AVerification:
    report: object
    claimed: dict[str, set[int]]
    perturbed: int = 0
    caught: int = 0

    @property
    def ok(self) -> bool:
        return self.report.status == "satisfied" and self.caught == self.perturbed


def verify_A(s, st, digits: int = 4, perturb: bool = True) -> AVerification:
    """Check the claimed ``(Y, Yt, Z)`` against :func:`build_A` on a ``digits``-digit window.

    With ``perturb`` every single-bit change of ``Z`` on the first
    ``digits - 1`` digits (the part where ``Y`` has its extra digit of room)
    is checked too; each one should be reported as a violation.
    """
    from .eqsys.solve import check_solution

    w = Window.digits(digits)
    sc, stc = _as_expr(s, "S"), _as_expr(st, "St")
    s_el = const_elements(sc.value, w) if isinstance(sc, Const) else set(s)
    st_el = const_elements(stc.value, w) if isinstance(stc, Const) else set(st)
    problems = check_A_precondition(s_el, st_el, w)
    if problems:
        raise GadgetError("precondition fails: " + problems[0])
    system = build_A(sc, stc)
    claimed = oracle_A_solution(s_el, st_el, w)
    a = {k: to_window(v, w) for k, v in claimed.items()}
    out = AVerification(check_solution(system, a, w, "truncated"), claimed)
    if perturb:
        for n in range(7 ** (digits - 1)):
            b = dict(a)
            b["Z"] = a["Z"].with_bits(a["Z"].bits ^ (1 << n))
            out.perturbed += 1
            out.caught += check_solution(system, b, w, "truncated").status == "violated"
    return out


# -- arithmetical hierarchy ---------------------------------------------------

_Q = {"E": "E", "A": "A", "∃": "E", "∀": "A", "exists": "E", "forall": "A"}


def parse_prefix(prefix) -> tuple[str, ...]:
    """Quantifier prefix, outermost first, as a tuple over ``E``/``A``."""
    if isinstance(prefix, str):
        prefix = [prefix] if prefix in _Q else list(prefix.replace(",", "").replace(" ", ""))
    out = []
    for q in prefix:
        if q not in _Q:
            raise GadgetError(f"unknown quantifier {q!r}")
        out.append(_Q[q])
    if not out:
        raise GadgetError("the quantifier prefix must be nonempty")
    return tuple(out)


def arith_domain(k: int) -> DigitPattern:
    """Strings ``x_k 1 ... x_1 1 w`` with ``w`` nonempty and not starting with 0."""
    return pattern(" ".join(["[36]* 1"] * k) + " [123456] W*")


def _member_fn(r) -> Callable[[int], bool]:
    if isinstance(r, Const):
        r = r.value
    if isinstance(r, Oracle):
        return r.member
    if isinstance(r, (DigitPattern, UPSet)):
        return r.__contains__
    if callable(r):
        return r
    return set(r).__contains__


def complement_oracle(r, k: int, name: str = "Rc") -> Oracle:
    """Complement of ``R`` inside the admissible domain of a ``k``-quantifier prefix."""
    dom = arith_domain(k)
    mem = _member_fn(r)
    return Oracle(name, lambda n: dom.member(n) and not mem(n), (0, float("inf")))


@dataclass(frozen=True)
class ArithStage:
    """One quantifier stage: its constraints over input variables ``IPj``/``INj``."""

    index: int
    quantifier: str
    system: System

    @property
    def inputs(self) -> tuple[str, str]:
        return f"IP{self.index}", f"IN{self.index}"

    @property
    def outputs(self) -> tuple[str, str]:
        return f"P{self.index}", f"N{self.index}"


def arith_stages(prefix) -> list[ArithStage]:
    """Stages innermost first. Stage ``j`` maps the positive input ``IPj``
    and its complement ``INj`` to ``Pj`` (quantifier applied) and ``Nj``
    (dual quantifier applied to the complement)."""
    out = []
    for j, q in enumerate(reversed(parse_prefix(prefix)), 1):
        ip, inn = Var(f"IP{j}"), Var(f"IN{j}")
        p, n, y, yt = f"P{j}", f"N{j}", f"Y{j}", f"Yt{j}"
        if q == "E":
            cs = [Equation(Var(p), E_expr(ip))] + A_constraints(inn, ip, y, yt, n)
        else:
            cs = [Equation(Var(n), E_expr(inn))] + A_constraints(ip, inn, y, yt, p)
        out.append(ArithStage(j, q, System("nat", (ip.name, inn.name, p, n, y, yt), tuple(cs))))
    return out


def build_arith(r, prefix, rc=None) -> System:
    """System whose output ``T`` is ``{w : Q1 x1 ... Qk xk  <xk 1 ... x1 1 w> in R}``.

    Only the part of ``R`` inside :func:`arith_domain` is used.

    The prefix is listed outermost first; the innermost block ``x_k`` leads
    the digit string. Each stage evaluates one quantifier on the positive
    chain and the dual quantifier on the complement chain, then ``removeone``
    strips the separating ``1`` from both. ``rc`` is the complement of ``R``
    inside the admissible domain (derived from ``R`` when omitted).
    """
    stages = arith_stages(prefix)
    k = len(stages)
    rconst = r if isinstance(r, Const) else Const("R", r)
    rcconst = rc if isinstance(rc, Const) else Const("Rc", rc if rc is not None else complement_oracle(r, k))
    dom = Const(f"DOM{k}", arith_domain(k))
    feed: dict[str, Expr] = {"IP1": Intersect(rconst, dom), "IN1": Intersect(rcconst, dom)}
    variables: list[str] = []
    cs: list = []
    for st in stages:
        j = st.index
        if j > 1:
            feed[f"IP{j}"] = removeone_expr(Var(f"P{j - 1}"))
            feed[f"IN{j}"] = removeone_expr(Var(f"N{j - 1}"))
        variables += [v for v in st.system.variables if v not in st.inputs]
        cs += [type(c)(substitute(c.lhs, feed), substitute(c.rhs, feed)) for c in st.system.constraints]
    variables.append("T")
    cs.append(Equation(Var("T"), removeone_expr(Var(f"P{k}"))))
    return System("nat", tuple(variables), tuple(cs), "T")


def stage_window(digits: int, j: int) -> Window:
    """Window of stage ``j``: each stage one digit below the previous one."""
    return Window.digits(digits - j + 1)


def arith_claimed(r, prefix, digits: int, rc=None) -> list[dict[str, set[int]]]:
    """Stagewise oracle values (inputs included) of every stage variable, on the stage windows."""
    qs = parse_prefix(prefix)
    k = len(qs)
    if digits - k + 1 < 2:
        raise GadgetError(f"{digits} digits leave no room for {k} stages")
    w1 = stage_window(digits, 1)
    mem = _member_fn(r)
    cmem = _member_fn(rc) if rc is not None else complement_oracle(r, k).member
    dom = const_elements(arith_domain(k), w1)
    in_p = {n for n in dom if mem(n)}
    in_n = {n for n in dom if cmem(n)}
    out = []
    for j, q in enumerate(reversed(qs), 1):
        w = stage_window(digits, j)
        in_p = {n for n in in_p if n <= w.hi}
        in_n = {n for n in in_n if n <= w.hi}
        vals = {f"IP{j}": in_p, f"IN{j}": in_n}
        if q == "E":
            sol = oracle_A_solution(in_n, in_p, w)
            vals[f"P{j}"], vals[f"N{j}"] = oracle_E(in_p), sol["Z"]
        else:
            sol = oracle_A_solution(in_p, in_n, w)
            vals[f"P{j}"], vals[f"N{j}"] = sol["Z"], oracle_E(in_n)
        vals[f"Y{j}"], vals[f"Yt{j}"] = sol["Y"], sol["Yt"]
        out.append(vals)
        in_p, in_n = oracle_removeone(vals[f"P{j}"]), oracle_removeone(vals[f"N{j}"])
    return out


def oracle_arith(r, prefix, digits: int) -> set[int]:
    """Direct nested quantifier evaluation.

    The witness block chosen at stage ``j`` ranges over the strings whose
    stage element fits in that stage's window, matching :func:`arith_claimed`.
    """
    qs = parse_prefix(prefix)
    k = len(qs)
    dom = arith_domain(k)
    rmem = _member_fn(r)

    def mem(n: int) -> bool:
        return dom.member(n) and rmem(n)

    def holds(level: int, rest: str) -> bool:
        stage = k - level
        hi = stage_window(digits, stage).hi
        vals = []
        for m in _prefixed([val7("1" + rest)], hi):
            vals.append(mem(m) if stage == 1 else holds(level + 1, rep7(m)))
        return any(vals) if qs[level] == "E" else all(vals)

    top = stage_window(digits, k).hi
    out = set()
    v = 1
    while val7("1" + rep7(v)) <= top:
        if holds(0, rep7(v)):
            out.add(v)
        v += 1
    return out


@dataclass
class ArithVerification:
    """Outcome of :func:`verify_arith`: per-stage reports and the three values of ``T``."""

    reports: list
    links_ok: bool
    t_gadget: set[int]
    t_stagewise: set[int]
    t_direct: set[int]

    @property
    def ok(self) -> bool:
        return (all(r.status == "satisfied" for r in self.reports) and self.links_ok
                and self.t_gadget == self.t_stagewise == self.t_direct)


def verify_arith(r, prefix, digits: int, rc=None) -> ArithVerification:
    """Check every stage of :func:`build_arith` against the stagewise oracles.

    Stage ``j`` is checked exactly (truncating semantics) on a window of
    ``digits - j + 1`` digits, so each stage's inputs are complete on its
    window. The ``removeone`` links between stages and the final output are
    evaluated through the gadget expression itself.
    """
    from .eqsys.solve import check_solution

    claimed = arith_claimed(r, prefix, digits, rc)
    stages = arith_stages(prefix)
    reports = []
    links_ok = True
    for st, vals in zip(stages, claimed):
        w = stage_window(digits, st.index)
        a = {k: to_window(v, w) for k, v in vals.items()}
        reports.append(check_solution(st.system, a, w, "truncated"))
        if st.index > 1:
            prev_w = stage_window(digits, st.index - 1)
            prev = claimed[st.index - 2]
            for src, dst in ((f"P{st.index - 1}", f"IP{st.index}"), (f"N{st.index - 1}", f"IN{st.index}")):
                got = evaluate_windowed(removeone_expr(Var("X")), {"X": to_window(prev[src], prev_w)},
                                        prev_w, "nat", "truncated")
                if {n for n in got.elements() if n <= w.hi} != vals[dst]:
                    links_ok = False
    k = len(stages)
    wk = stage_window(digits, k)
    final = evaluate_windowed(removeone_expr(Var("X")), {"X": to_window(claimed[-1][f"P{k}"], wk)}, wk, "nat",
                              "truncated")
    return ArithVerification(reports, links_ok, set(final.elements()), oracle_removeone(claimed[-1][f"P{k}"]),
                             oracle_arith(r, prefix, digits))


def to_window(elems: Iterable[int], window: Window) -> WindowSet:
    return WindowSet.from_iterable(window, [n for n in elems if n in window])


def const_elements(value, window: Window) -> set[int]:
    return set(const_window(value, window).elements())


GADGETS = {"removeone": build_removeone, "E": build_E}
__all__ = [
    "GadgetError", "GadgetExpr", "build_removeone", "build_E", "build_appendthreesix", "build_A", "build_arith",
    "oracle_removeone", "oracle_E", "oracle_append", "oracle_A", "oracle_A_solution", "oracle_arith",
    "arith_claimed", "arith_stages", "verify_arith", "ArithVerification", "ArithStage", "stage_window",
    "parse_prefix", "check_A_precondition", "verify_A", "AVerification", "removeone_expr", "E_expr", "chain",
    "appendthreesix_expr", "A_constraints",
    "pattern", "complement_oracle", "arith_domain", "to_window", "const_elements", "EMPTY",
]
