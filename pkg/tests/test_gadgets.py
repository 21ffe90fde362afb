import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_A_pair, random_subset
from seteq.digits import rep7, val7
from seteq.eqsys import TruncSub, Var, evaluate_windowed, kleene_solve
from seteq.gadgets import (GadgetError, build_A, build_appendthreesix, build_arith, build_E, build_removeone,
                           const_elements, oracle_A, oracle_append, oracle_E, oracle_removeone, parse_prefix,
                           pattern, to_window, verify_A, verify_arith)
from seteq.numset import EMPTY, UPSet, Window, WindowSet

W4 = Window.digits(4)
REMOVEONE_DOMAIN = const_elements(pattern("1 | 1 [123456] W*"), W4)
E_DOMAIN = const_elements(pattern("[36]* 1 W*"), W4)


def run(g, elems, w=W4):
    return set(g.evaluate(WindowSet.from_iterable(w, elems)).elements())


@given(st.integers(0, 2**32), st.floats(0.01, 0.5))
def test_removeone_matches_oracle(seed, density):
    xs = random_subset(REMOVEONE_DOMAIN, seed, density)
    g = build_removeone()
    hz = 7**3 - 1
    assert {n for n in run(g, xs) if n <= hz} == {n for n in oracle_removeone(xs) if n <= hz}


@given(st.integers(0, 2**32), st.floats(0.05, 0.9))
def test_removeone_kills_ten_prefix(seed, density):
    xs = random_subset(const_elements(pattern("1 0 W*"), W4), seed, density)
    assert run(build_removeone(), xs) == set()


def test_removeone_examples():
    g = build_removeone()
    assert run(g, {12}) == {5}
    assert run(g, {7}) == set()
    assert run(g, {1}) == {0}
    assert g.admissible({12, 1}) and not g.admissible({7})


@given(st.integers(0, 2**32), st.floats(0.01, 0.5))
def test_E_matches_oracle(seed, density):
    xs = random_subset(E_DOMAIN, seed, density)
    assert run(build_E(), xs) == oracle_E(xs)


def test_E_examples_and_structure():
    g = build_E()
    assert run(g, {159}) == {12}
    assert run(g, {12}) == {12}
    assert run(g, {306, 159}) == {12}
    assert any(isinstance(n, TruncSub) for n in g.expr.walk())


@pytest.mark.parametrize("seed,expect", [
    (UPSet.finite([9]), [9, 156, 303]),
    (EMPTY, []),
    (UPSet.finite([10]), [10, 157, 304]),
])
def test_appendthreesix_examples(seed, expect):
    s = build_appendthreesix(seed)
    w = Window.digits(3)
    least, _ = kleene_solve(s, w, "least")
    great, _ = kleene_solve(s, w, "greatest")
    assert least["Y"].elements() == great["Y"].elements() == expect
    assert sorted(oracle_append(seed.exceptions, w)) == expect


@settings(max_examples=15)
@given(st.frozensets(st.sampled_from(sorted(const_elements(pattern("1 W*"), Window.digits(3)))), max_size=4))
def test_appendthreesix_unique_on_window(seeds):
    s = build_appendthreesix(UPSet.finite(seeds))
    w = Window.digits(4)
    least, _ = kleene_solve(s, w, "least", "truncated")
    great, _ = kleene_solve(s, w, "greatest", "truncated")
    assert least["Y"].bits == great["Y"].bits
    assert set(least["Y"].elements()) == oracle_append(seeds, w)


def test_appendthreesix_rejects_bad_seed():
    with pytest.raises(GadgetError):
        build_appendthreesix(UPSet.finite([3]))
    with pytest.raises(GadgetError):
        build_appendthreesix(pattern("[36] W*"))


@pytest.mark.parametrize("s,st_,z", [
    (pattern("[36]* 1 5"), EMPTY, [12]),
    (pattern("3* 1 5"), pattern("[36]* 6 [36]* 1 5"), []),
    (EMPTY, pattern("[36]* 1 W*"), []),
])
def test_A_examples(s, st_, z):
    v = verify_A(s, st_, 4)
    assert v.ok
    assert sorted(v.claimed["Z"]) == z
    assert v.caught == v.perturbed == 343


@pytest.mark.parametrize("seed", range(4))
def test_A_random_pairs(seed):
    s, st_ = random_A_pair(seed)
    v = verify_A(s, st_, 4, perturb=False)
    assert v.ok, v.report.summary()


def test_A_precondition_rejected():
    with pytest.raises(GadgetError):
        verify_A(pattern("3* 1 5"), EMPTY, 4)
    assert len(build_A(EMPTY, EMPTY).constraints) == 4


def test_oracle_A_quantifies_over_window():
    w = Window.digits(3)
    assert oracle_A(const_elements(pattern("[36]* 1 5"), w), w) == {12}
    # <615> = 306 is missing, so w = 5 fails
    assert oracle_A(const_elements(pattern("3* 1 5"), w), w) == set()


@pytest.mark.parametrize("prefix,relation,expect", [
    ("E", "[36]* 1 5", {5}),
    ("A", "3* 1 5", set()),
    ("EA", "[36]* 1 3 1 5", {5}),
    ("AE", "[36]* 1 [36]* 1 2", {2}),
])
def test_arith_pipeline(prefix, relation, expect):
    v = verify_arith(pattern(relation), prefix, 5)
    assert v.ok, [r.summary() for r in v.reports]
    assert v.t_direct == expect


def test_arith_system_shape():
    s = build_arith(pattern("[36]* 1 3 1 5"), "EA")
    assert s.output == "T"
    assert parse_prefix("∃∀") == ("E", "A")
    with pytest.raises(GadgetError):
        parse_prefix("")
