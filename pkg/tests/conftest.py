import pathlib

import pytest
from hypothesis import settings, strategies as st

from seteq.numset import UPSet

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


@st.composite
def upsets(draw, max_period=6, max_threshold=12, nat=False):
    p = draw(st.integers(1, max_period))
    t = draw(st.integers(0, max_threshold))
    exc = draw(st.frozensets(st.integers(-t, t)))
    pos = draw(st.frozensets(st.integers(0, p - 1)))
    neg = frozenset() if nat else draw(st.frozensets(st.integers(0, p - 1)))

    def pred(n):
        if nat and n < 0:
            return False
        if -t <= n <= t:
            return n in exc
        return (n % p in pos) if n > 0 else (n % p in neg)

    return UPSet.from_predicate(pred, p, t + 1)


@st.composite
def finite_sets(draw, lo=-20, hi=20, max_size=6):
    return UPSet.finite(draw(st.frozensets(st.integers(lo, hi), max_size=max_size)))


@pytest.fixture
def corpus():
    return CORPUS


def witness_radius(s: UPSet, t: UPSet) -> int:
    """Any sum ``m = a + b`` with ``|m| <= r`` has a witness with ``|a| <= r + witness_radius``."""
    import math
    return 2 * (s.reach + t.reach) + 2 * math.lcm(s.period, t.period) + 2


def brute_op(op: str, s: UPSet, t: UPSet, lo: int, hi: int) -> set[int]:
    """Element-wise reference for the five binary operations on ``[lo, hi]``."""
    if op == "union":
        return {n for n in range(lo, hi + 1) if n in s or n in t}
    if op == "intersect":
        return {n for n in range(lo, hi + 1) if n in s and n in t}
    r = max(abs(lo), abs(hi)) + witness_radius(s, t)
    a_s = [a for a in range(-r, r + 1) if a in s]
    sign = 1 if op == "add" else -1
    out = {n for n in range(lo, hi + 1) if any(sign * (n - a) in t for a in a_s)}
    if op == "truncsub":
        out = {n for n in out if n >= 0}
    return out


# -- random systems ---------------------------------------------------------------

def small_consts():
    from seteq.eqsys import Const
    return st.one_of(
        st.frozensets(st.integers(0, 4), max_size=3).map(lambda s: Const("C" + "".join(map(str, sorted(s))),
                                                                             UPSet.finite(s))),
        st.integers(2, 3).map(lambda p: Const(f"M{p}", UPSet.progression(0, p, 0))),
    )


def monotone_exprs(variables, allow_sub=True):
    """Expressions over N that are monotone: subtrahends are constants."""
    from seteq.eqsys import Add, Intersect, TruncSub, Union, Var
    leaves = st.one_of(st.sampled_from([Var(v) for v in variables]), small_consts())

    def grow(inner):
        opts = [
            st.tuples(inner, inner).map(lambda p: Union(*p)),
            st.tuples(inner, inner).map(lambda p: Intersect(*p)),
            st.tuples(inner, inner).map(lambda p: Add(*p)),
        ]
        if allow_sub:
            opts.append(st.tuples(inner, small_consts()).map(lambda p: TruncSub(*p)))
        return st.one_of(*opts)

    return st.recursive(leaves, grow, max_leaves=4)


@st.composite
def resolved_systems(draw, max_vars=2):
    from seteq.eqsys import Equation, System, Var
    n = draw(st.integers(1, max_vars))
    names = ["X", "Y"][:n]
    cs = tuple(Equation(Var(v), draw(monotone_exprs(names))) for v in names)
    return System("nat", tuple(names), cs, "X")


def subset_minimum(solutions, variables):
    """The solution contained in every other one, or None."""
    for a in solutions:
        if all(all(a[v].bits & ~b[v].bits == 0 for v in variables) for b in solutions):
            return a
    return None


def random_subset(elems, seed: int, density: float) -> set[int]:
    import numpy as np
    elems = sorted(elems)
    rng = np.random.default_rng(seed)
    keep = rng.random(len(elems)) < density
    return {e for e, k in zip(elems, keep) if k}


def random_A_pair(seed: int):
    """``(S, S~)`` as digit patterns meeting the A precondition, one family per tail ``w``."""
    import random
    from seteq.digits import compile_pattern
    from seteq.numset import EMPTY
    rnd = random.Random(seed)
    tails = rnd.sample(["2", "3", "5", "12", "40", "61", "6"], k=rnd.randint(1, 3))
    s_parts, st_parts = [], []
    for w in tails:
        body = " ".join(w)
        mode = rnd.choice(["full", "absent", "punctured", "single"])
        if mode == "full":
            s_parts.append(f"[36]* 1 {body}")
        elif mode == "absent":
            st_parts.append(f"[36]* 1 {body}")
        elif mode == "punctured":
            s_parts.append(f"3* 1 {body}")
            st_parts.append(f"[36]* 6 [36]* 1 {body}")
        else:
            s_parts.append(f"1 {body}")
            st_parts.append(f"[36]+ 1 {body}")
    s = compile_pattern(" | ".join(f"({p})" for p in s_parts)) if s_parts else EMPTY
    st_ = compile_pattern(" | ".join(f"({p})" for p in st_parts)) if st_parts else EMPTY
    return s, st_


def broken_encoding(draw_int, base):
    """Damage a sigma image so it is no longer one: returns the damaged set."""
    from seteq.sigma import MODULUS, sigma_encode
    from seteq.numset import up_binary
    x = sigma_encode(base).value
    kind = draw_int(0, 3)
    n = draw_int(-5, 5)
    if kind == 0:   # drop 0
        return up_binary("intersect", x, up_binary("union", UPSet.finite([]), _not(UPSet.finite([0]))))
    if kind == 1:   # a stray point on an unused track
        track = [2, 3, 5, 7, 10, 11, 14, 15][draw_int(0, 7)]
        return up_binary("union", x, UPSet.finite([MODULUS * n + track]))
    if kind == 2:   # a hole in a full track
        track = [6, 8, 9, 12][draw_int(0, 3)]
        return up_binary("intersect", x, _not(UPSet.finite([MODULUS * n + track])))
    # a whole extra track
    return up_binary("union", x, UPSet.progression([1, 4][draw_int(0, 1)], MODULUS))


def _not(s):
    from seteq.numset import up_complement
    return up_complement(s)


# -- seeded generators for the acceptance suite ------------------------------------

def rand_upset(rng, max_period=6, max_threshold=12, nat=False) -> UPSet:
    p = rng.randint(1, max_period)
    t = rng.randint(0, max_threshold)
    exc = {n for n in range(-t, t + 1) if rng.random() < 0.4}
    pos = {r for r in range(p) if rng.random() < 0.5}
    neg = set() if nat else {r for r in range(p) if rng.random() < 0.5}

    def pred(n):
        if nat and n < 0:
            return False
        if -t <= n <= t:
            return n in exc
        return (n % p in pos) if n > 0 else (n % p in neg)

    return UPSet.from_predicate(pred, p, t + 1)


def rand_finite(rng, lo=-8, hi=8, max_size=4) -> UPSet:
    return UPSet.finite(rng.sample(range(lo, hi + 1), rng.randint(0, max_size)))


def rand_monotone_expr(rng, names, depth=2):
    from seteq.eqsys import Add, Const, Intersect, TruncSub, Union, Var

    def const():
        if rng.random() < 0.7:
            s = sorted(rng.sample(range(0, 5), rng.randint(0, 2)))
            return Const("C" + "".join(map(str, s)), UPSet.finite(s))
        p = rng.randint(2, 3)
        return Const(f"M{p}", UPSet.progression(0, p, 0))

    def node(d):
        if d == 0 or rng.random() < 0.3:
            return Var(rng.choice(names)) if rng.random() < 0.6 else const()
        op = rng.choice(["union", "union", "add", "inter", "tsub"])
        if op == "tsub":
            return TruncSub(node(d - 1), const())
        cls = {"union": Union, "add": Add, "inter": Intersect}[op]
        return cls(node(d - 1), node(d - 1))

    return node(depth)


def rand_resolved_system(rng, nvars):
    from seteq.eqsys import Equation, System, Var
    names = ["X", "Y", "Z"][:nvars]
    return System("nat", tuple(names), tuple(Equation(Var(v), rand_monotone_expr(rng, names)) for v in names), "X")


# -- acceptance reporting ----------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
