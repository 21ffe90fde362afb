import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS, monotone_exprs, resolved_systems, small_consts, subset_minimum, upsets
from seteq.numset import NAT, UPSet, Window, WindowSet, up_binary, up_negate
from seteq.eqsys import (Add, Const, DSLError, Equation, Inclusion, Intersect, Negate, Sub, System, SystemError_,
                         TruncSub, Union, Var, assemble_pos_neg, brute_force_solutions, check_solution,
                         evaluate_exact, evaluate_windowed, format_system, inclusion_to_equation, kleene_solve,
                         load_system, negate_system, parse_system, window_of_upset)
from seteq.eqsys.solve import BRUTE_MAX_BITS, SolveError, least_supports


# -- windowed evaluation is sound on its horizon -------------------------------------

def int_exprs():
    leaves = upsets(max_period=3, max_threshold=5).map(lambda s: Const("K" + str(abs(hash(s)) % 10**6), s))

    def grow(inner):
        return st.one_of(
            st.tuples(inner, inner).map(lambda p: Union(*p)),
            st.tuples(inner, inner).map(lambda p: Intersect(*p)),
            st.tuples(inner, inner).map(lambda p: Add(*p)),
            st.tuples(inner, inner).map(lambda p: Sub(*p)),
            st.tuples(inner, inner).map(lambda p: TruncSub(*p)),
            inner.map(Negate),
        )

    return st.recursive(leaves, grow, max_leaves=4)


@given(int_exprs(), st.integers(-40, -5), st.integers(5, 40))
def test_horizon_is_sound(e, lo, hi):
    w = Window(lo, hi)
    exact = evaluate_exact(e, {}, "int")
    got = evaluate_windowed(e, {}, w, "int", "horizon")
    x, y = got.horizon
    for n in range(max(x, lo), min(y, hi) + 1):
        assert (n in exact) == got.member(n)
    slo, shi = got.support
    assert all(slo <= n <= shi for n in exact.elements_in(lo, hi))


@given(monotone_exprs(["X"]), st.frozensets(st.integers(0, 30), max_size=5))
def test_truncated_matches_exact_on_finite_inputs(e, xs):
    # every operator is monotone and truncation only drops values, so the window result undershoots
    w = Window(0, 30)
    a = {"X": WindowSet.from_iterable(w, xs)}
    got = evaluate_windowed(e, a, w, "nat", "truncated").elements()
    exact = evaluate_exact(e, {"X": UPSet.finite(xs)}, "nat")
    ref = exact.elements_in(0, 30)
    # truncation can only lose sums that leave the window
    assert set(got) <= set(ref)


# -- Kleene against brute force ---------------------------------------------------

@settings(max_examples=25)
@given(resolved_systems())
def test_least_solution_is_subset_minimum(s):
    u = 7
    sols = brute_force_solutions(s, u)
    least, _ = kleene_solve(s, Window(0, u), "least", "truncated")
    assert sols, "a resolved monotone system has a fixed point on any window"
    m = subset_minimum(sols, s.variables)
    assert m is not None
    assert {v: least[v].bits for v in s.variables} == {v: m[v].bits for v in s.variables}


@settings(max_examples=25)
@given(resolved_systems())
def test_greatest_solution_is_subset_maximum(s):
    u = 7
    sols = brute_force_solutions(s, u)
    top, _ = kleene_solve(s, Window(0, u), "greatest", "truncated")
    for a in sols:
        assert all(a[v].bits & ~top[v].bits == 0 for v in s.variables)
    assert any(all(a[v].bits == top[v].bits for v in s.variables) for a in sols)


def test_appendthreesix_least_equals_greatest(corpus):
    s = load_system(corpus / "systems" / "appendthreesix.eq")
    least, r1 = kleene_solve(s, Window.digits(3), "least")
    great, r2 = kleene_solve(s, Window.digits(3), "greatest")
    assert least["Y"].elements() == great["Y"].elements() == [9, 156, 303]
    assert r1.ok and r2.ok


def test_kleene_rejects_nonmonotone():
    s = System("nat", ("X",), (Equation(Var("X"), TruncSub(Const("A", UPSet.finite([1, 2])), Var("X"))),))
    with pytest.raises(SolveError):
        kleene_solve(s, Window(0, 5))
    unresolved = System("nat", ("X",), (Inclusion(Var("X"), Const("A", UPSet.finite([1]))),))
    with pytest.raises(SolveError):
        kleene_solve(unresolved, Window(0, 5))


def test_int_horizon_with_unbounded_variable():
    # X = {0} ∪ (X - 1): the least solution is the non-positive integers
    s = System("int", ("X",), (Equation(Var("X"), Union(Const("Z", UPSet.finite([0])),
                                                        Sub(Var("X"), Const("O", UPSet.finite([1]))))),))
    w = Window(-20, 20)
    sups = least_supports(s, s.resolved(), w)
    assert sups["X"][1] == 0
    val, rep = kleene_solve(s, w)
    x, y = val["X"].horizon
    assert x <= y
    assert all(val["X"].member(n) == (n <= 0) for n in range(x, y + 1))


# -- brute force -----------------------------------------------------------------------

def test_brute_examples(corpus):
    s = System("nat", ("X",), (Equation(Var("X"), Union(Const("Z", UPSet.finite([0])),
                                                        Add(Var("X"), Const("T", UPSet.finite([2]))))),))
    sols = brute_force_solutions(s, 10)
    assert [a["X"].elements() for a in sols] == [[0, 2, 4, 6, 8, 10]]
    assert brute_force_solutions(load_system(corpus / "systems" / "contradictory.eq"), 8) == []


def test_brute_cap():
    s = System("nat", ("X",), (Equation(Var("X"), Var("X")),))
    with pytest.raises(SolveError):
        brute_force_solutions(s, BRUTE_MAX_BITS + 5)


def test_brute_workers_agree():
    s = System("nat", ("X", "Y"), (Equation(Var("X"), Union(Var("Y"), Const("A", UPSet.finite([1])))),
                                  Equation(Var("Y"), Intersect(Var("X"), Const("E", UPSet.progression(0, 2, 0))))))
    one = brute_force_solutions(s, 9)
    many = brute_force_solutions(s, 9, workers=2)
    assert [{k: v.bits for k, v in a.items()} for a in one] == [{k: v.bits for k, v in a.items()} for a in many]


# -- transforms ------------------------------------------------------------------------

def _solution_bits(sols, variables):
    return sorted(tuple(a[v].bits for v in variables) for a in sols)


@settings(max_examples=20)
@given(monotone_exprs(["X"]), monotone_exprs(["X"]))
def test_inclusion_to_equation_preserves_solutions(a, b):
    s = System("nat", ("X",), (Inclusion(a, b),))
    t = inclusion_to_equation(s)
    assert all(isinstance(c, Equation) for c in t.constraints)
    assert _solution_bits(brute_force_solutions(s, 8), ["X"]) == _solution_bits(brute_force_solutions(t, 8), ["X"])


def union_add_exprs():
    leaves = st.one_of(st.just(Var("X")),
                       st.frozensets(st.integers(-2, 2), max_size=2).map(
                           lambda s: Const("K" + "_".join(map(str, sorted(s))).replace("-", "m"), UPSet.finite(s))))
    return st.recursive(leaves, lambda i: st.one_of(st.tuples(i, i).map(lambda p: Union(*p)),
                                                     st.tuples(i, i).map(lambda p: Add(*p))), max_leaves=4)


@settings(max_examples=20)
@given(union_add_exprs())
def test_negate_system_negates_solutions(e):
    s = System("int", ("X",), (Equation(Var("X"), e),))
    t = negate_system(s)
    assert negate_system(t) == s
    w = Window(-6, 6)
    mirrored = sorted(int(bin(a["X"].bits)[2:].zfill(w.size)[::-1], 2) for a in brute_force_solutions(s, w))
    # bit i stands for lo + i, so reversing the bit string negates the set on a symmetric window
    assert mirrored == sorted(a["X"].bits for a in brute_force_solutions(t, w))


def test_assemble_pos_neg(corpus):
    pos = load_system(corpus / "systems" / "assemble_pos.eq")
    neg = load_system(corpus / "systems" / "assemble_neg.eq")
    s = assemble_pos_neg(pos, neg)
    assert s.output == "X" and s.variables[0] == "X"
    val, rep = kleene_solve(s, Window(-40, 40))
    x, y = val["X"].horizon
    assert x <= -10 and y >= 10
    for n in range(x, y + 1):
        expect = (n >= 0 and n % 3 == 0) or (n < 0 and (-n) % 4 == 1)
        assert val["X"].member(n) == expect


def test_negate_system_rejects_other_ops():
    s = System("int", ("X",), (Equation(Var("X"), Intersect(Var("X"), Const("A", UPSet.finite([1])))),))
    with pytest.raises(SystemError_):
        negate_system(s)


# -- checking --------------------------------------------------------------------------

def test_check_solution_exact_and_windowed():
    s = System("nat", ("X",), (Equation(Var("X"), Union(Const("Z", UPSet.finite([0])),
                                                        Add(Var("X"), Const("T", UPSet.finite([2]))))),))
    evens = UPSet.progression(0, 2, 0)
    assert check_solution(s, {"X": evens}).ok
    bad = check_solution(s, {"X": up_binary("union", evens, UPSet.finite([5]))})
    assert bad.status == "violated" and bad.verdicts[0].witness == 5
    w = Window(0, 20)
    assert check_solution(s, {"X": window_of_upset(evens, w)}, w, "truncated").ok
    recs = bad.records()
    assert recs[0]["record"] == "report" and recs[1]["status"] == "violated"


def test_unknown_beyond_horizon():
    s = System("nat", ("X",), (Equation(Var("X"), Var("X")),))
    w = Window(0, 10)
    blind = WindowSet(w, 0, (5, 4))
    assert check_solution(s, {"X": blind}, w).status == "unknown-beyond-horizon"


# -- DSL -------------------------------------------------------------------------------

def test_corpus_roundtrip(corpus):
    files = sorted((corpus / "systems").glob("*.eq"))
    assert len(files) >= 10
    for f in files:
        s = load_system(f)
        text = format_system(s)
        assert parse_system(text) == s
        assert format_system(parse_system(text)) == text


@given(resolved_systems())
def test_random_roundtrip(s):
    assert parse_system(format_system(s)) == s


@pytest.mark.parametrize("text,line", [
    ("domain nat\nvar X\neq X = union(X, Q)\n", 3),
    ("domain nat\nvar X\nconst C = up \"{1,\"\neq X = C\n", 3),
    ("domain nat\nvar X\nfrobnicate\n", 3),
    ("domain real\n", 1),
    ("domain nat\nvar X\neq X = union(X\n", 3),
    ("domain nat\nvar X\nconst P = pattern \"1 ?\"\neq X = P\n", 3),
])
def test_dsl_errors_name_the_line(text, line):
    with pytest.raises(DSLError) as err:
        parse_system(text)
    assert err.value.line == line


def test_system_validation():
    with pytest.raises(SystemError_):
        System("nat", ("X",), (Equation(Var("X"), Var("Y")),))
    with pytest.raises(SystemError_):
        System("nat", ("X",), (Equation(Var("X"), Negate(Var("X"))),))
