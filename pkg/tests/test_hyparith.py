import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from seteq.digits import val7
from seteq.eqsys import evaluate_windowed, Var
from seteq.hyparith import (RingSets, SpecError, address, build_HA_system, check_HA,
                            check_well_founded, compute_goal_bundle, extract_target, format_spec, load_spec,
                            oracle_remove10, parse_address, parse_spec, remove10_expr, resolve, target_direct)
from seteq.numset import Window, WindowSet, up_complement

SPECS = CORPUS / "specs"
WELL_FOUNDED = ["two_level", "three_level", "leaf_root"]


@pytest.fixture(scope="module")
def two_level():
    return load_spec(SPECS / "two_level.spec")


def test_resolve(two_level):
    assert resolve(two_level, ()) == 1
    assert resolve(two_level, ("3",)) == 4
    assert resolve(two_level, ("66",)) == 4
    assert resolve(two_level, ("3", "3")) is None


def test_ring_sets(two_level):
    rs = RingSets(two_level)
    assert rs.B(1).exceptions == frozenset({2}) and rs.B(1).is_finite
    assert 2 not in rs.B(4) and 3 in rs.B(4)
    three = RingSets(load_spec(SPECS / "three_level.spec"))
    assert three.B(3).exceptions == frozenset({1, 3})
    assert all((n in three.B(1)) == (n not in (1, 3)) for n in range(30))


@pytest.mark.parametrize("name", WELL_FOUNDED)
def test_duality(name):
    spec = load_spec(SPECS / f"{name}.spec")
    rs = RingSets(spec)
    for i in [v for _, v in spec.tau1] + [v for _, v in spec.tau2]:
        if rs.defined(i):
            assert rs.C(i) == up_complement(rs.B(i), "nat")


def test_well_founded_checks():
    loop = check_well_founded(load_spec(SPECS / "self_loop.spec"))
    assert not loop and loop.cycle == (1, 1)
    for name in WELL_FOUNDED:
        assert check_well_founded(load_spec(SPECS / f"{name}.spec"))
    with pytest.raises(SpecError):
        RingSets(load_spec(SPECS / "self_loop.spec"))


def test_spec_format_roundtrip():
    for f in SPECS.glob("*.spec"):
        spec = load_spec(f)
        assert parse_spec(format_spec(spec)) == spec


@pytest.mark.parametrize("text", [
    "tau1 0 -> 1\ntau1 1 -> 1\nroot 1\n",       # tau1 not one-to-one
    "tau1 0 -> 1\ntau2 0 -> 1\nroot 1\n",       # overlapping images
    "tau1 0 -> 1\n",                            # no root
    "tau2 0 -> 1\nf 0 total\nroot 1\n",         # total without default
    "tau1 x -> 1\nroot 1\n",
])
def test_bad_specs(text):
    with pytest.raises(SpecError):
        parse_spec(text)


def test_missing_totality_is_an_error():
    spec = parse_spec("tau1 2 -> 4\ntau2 0 -> 1\nf 0 0 -> 4\nroot 1\n")
    with pytest.raises(SpecError):
        RingSets(spec).B(1)


@given(st.lists(st.text(alphabet="36", max_size=3), max_size=3), st.text(alphabet="0123456", max_size=3))
def test_address_roundtrip(path, w):
    n = address(path, w)
    assert parse_address(n) == (tuple(path), w)


def test_derived_members(two_level):
    b = compute_goal_bundle(two_level, 5)
    assert 51 in b["Goal0"] and val7("102") == 51
    assert 3481 in b["Goal1"] and val7("13102") == 3481
    assert 3482 in b["R0"] and val7("13103") == 3482


@pytest.mark.parametrize("name", WELL_FOUNDED)
def test_bundle_invariants(name):
    spec = load_spec(SPECS / f"{name}.spec")
    b = compute_goal_bundle(spec, 5)
    assert b["R0"] <= b["Goal0"] and b["R1"] <= b["Goal1"]
    assert not b["Goal0"] & b["Goal1"]
    assert b["Goal0"] | b["Goal1"] <= b["Admissible"]
    assert not b["Goal0"] & b["R1"] and not b["Goal1"] & b["R0"]
    # admissibility is prefix-closed over path codes
    for n in b["Admissible"]:
        path, _ = parse_address(n)
        for k in range(len(path)):
            assert address(path[:k], "") in b["Admissible"]


@pytest.mark.parametrize("name", WELL_FOUNDED)
def test_eight_constraints_hold(name):
    spec = load_spec(SPECS / f"{name}.spec")
    assert len(build_HA_system(spec).constraints) == 8
    report, bundle = check_HA(spec, 5)
    assert report.ok, report.summary()
    target = extract_target(bundle)
    assert set(target.elements()) == target_direct(spec, bundle.window)


def test_flip_is_violated(two_level):
    from seteq.eqsys import check_solution
    report, bundle = check_HA(two_level, 4)
    a = bundle.assignment()
    a["X0"] = a["X0"].with_bits(a["X0"].bits ^ (1 << 51))
    flipped = check_solution(build_HA_system(two_level), a, bundle.window, "truncated", region=(0, 7**4 - 1))
    assert flipped.status == "violated"


def test_extract_target_examples(two_level):
    _, bundle = check_HA(two_level, 4)
    assert 2 in extract_target(bundle).elements()
    w = Window.digits(4)
    assert extract_target(WindowSet.empty(w)).elements() == []


@settings(max_examples=30)
@given(st.frozensets(st.integers(0, 7**4 - 1), max_size=40))
def test_remove10_matches_oracle(xs):
    w = Window.digits(4)
    got = evaluate_windowed(remove10_expr(Var("X")), {"X": WindowSet.from_iterable(w, xs)}, w, "nat", "truncated")
    hz = 7**2 - 1
    assert {n for n in got.elements() if n <= hz} == {n for n in oracle_remove10(xs) if n <= hz}
