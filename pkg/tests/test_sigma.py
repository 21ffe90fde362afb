import pytest
from hypothesis import given, settings, strategies as st

from conftest import broken_encoding, finite_sets, upsets
from seteq.eqsys import Add, Const, Equation, Intersect, System, SystemError_, Union, Var, parse_system
from seteq.numset import EMPTY, UPSet, up_binary
from seteq.sigma import (ADD_PAD, GOOD_RHS, GOOD_SHIFT, UNION_PAD, EncodingError, TrackSet, compile_addition_only,
                         complete_assignment, decompose_system, embed, encode_assignment, good_encoding_check,
                         parse_sidecar, project, readback, sigma_decode, sigma_encode, verify_correspondence)

add = lambda a, b: up_binary("add", a, b)
union = lambda a, b: up_binary("union", a, b)


def test_sigma_of_empty():
    e = sigma_encode(EMPTY)
    assert 0 in e and 13 not in e
    for t in (6, 8, 9, 12):
        assert e.track(t) == UPSet.progression(t, 16)
    assert add(e.value, GOOD_SHIFT) == GOOD_RHS


def test_track_13_readout():
    assert 13 in sigma_encode(UPSet.finite([0]))
    assert 13 + 16 * 5 in sigma_encode(UPSet.finite([5]))
    s0 = sigma_encode(UPSet.finite([0]), "sigma0")
    assert 13 in s0 and -10 not in s0 and 6 in s0
    with pytest.raises(EncodingError):
        sigma_encode(UPSet.finite([-1]), "sigma0")


@given(upsets())
def test_roundtrip(s):
    assert sigma_decode(sigma_encode(s)) == s
    assert sigma_encode(s).payload == s


@given(upsets(nat=True))
def test_roundtrip_sigma0(s):
    assert sigma_decode(sigma_encode(s, "sigma0"), "sigma0") == s


@given(upsets(), st.integers(0, 15))
def test_embed_project(s, i):
    assert project(i, embed(i, s)) == s


@given(upsets())
def test_good_encoding_positive(s):
    g = good_encoding_check(sigma_encode(s).value)
    assert g.by_equation and g.by_structure


@given(finite_sets(), st.data())
def test_good_encoding_negative(base, data):
    x = broken_encoding(lambda a, b: data.draw(st.integers(a, b)), base)
    g = good_encoding_check(x)
    assert g.agree
    assert not g.by_structure


def test_good_encoding_examples():
    assert good_encoding_check(sigma_encode(UPSet.finite([5])).value)
    assert not good_encoding_check(UPSet.progression(5, 16))
    with pytest.raises(EncodingError):
        sigma_decode(UPSet.progression(5, 16))


@settings(max_examples=40)
@given(finite_sets(-6, 6, 3), finite_sets(-6, 6, 3), finite_sets(-12, 12, 4))
def test_addition_gadget_iff(y, z, x):
    sy, sz, sx = (sigma_encode(v).value for v in (y, z, x))
    s0 = sigma_encode(UPSet.finite([0])).value
    lhs = add(add(sy, sz), ADD_PAD)
    rhs = add(add(sx, s0), ADD_PAD)
    assert (lhs == rhs) == (add(y, z) == x)
    sum_ = add(y, z)
    assert add(add(sy, sz), ADD_PAD) == add(add(sigma_encode(sum_).value, s0), ADD_PAD)


@settings(max_examples=40)
@given(finite_sets(-6, 6, 3), finite_sets(-6, 6, 3), finite_sets(-6, 6, 4))
def test_union_gadget_iff(y, z, x):
    sy, sz, sx = (sigma_encode(v).value for v in (y, z, x))
    lhs = add(add(sy, sz), UNION_PAD)
    rhs = add(add(sx, sx), UNION_PAD)
    assert (lhs == rhs) == (union(y, z) == x)


def test_gadget_examples():
    es = compile_addition_only(parse_system("domain int\nvar X Y Z\neq X = add(Y, Z)\n"))
    assert len(es.system.constraints) == 4
    ok = {"Y": UPSet.finite([1]), "Z": UPSet.finite([2]), "X": UPSet.finite([3])}
    bad = dict(ok, X=UPSet.finite([4]))
    from seteq.eqsys import check_solution
    assert check_solution(es.system, encode_assignment(ok, es)).ok
    assert not check_solution(es.system, encode_assignment(bad, es)).ok


def test_decompose():
    s = parse_system("""domain int
var X A B
const C = up "{1}"
eq X = union(add(A, B), C)
eq A = C
eq B = C
""")
    d = decompose_system(s)
    assert d.variables == ("X", "A", "B", "T1", "T2")
    assert [type(c.rhs).__name__ for c in d.constraints] == ["Add", "Const", "Union", "Const", "Const"]
    assert decompose_system(d) == d
    with pytest.raises(SystemError_):
        decompose_system(System("int", ("X",), (Equation(Var("X"), Intersect(Var("X"), Var("X"))),)))


@pytest.mark.parametrize("text,u", [
    ('eq X = add(X, T)\nconst T = up "{0}"', 8),
    ('eq X = union(X, T)\nconst T = up "{2,3}"', 8),
    ('eq X = union(add(X, X), T)\nconst T = up "{0,1}"', 7),
])
def test_decompose_preserves_projections(text, u):
    from seteq.eqsys import brute_force_solutions
    eq, const = text.split("\n")
    s = parse_system(f"domain nat\nvar X\n{const}\n{eq}\n")
    d = decompose_system(s)
    orig = sorted(a["X"].bits for a in brute_force_solutions(s, u))
    proj = sorted({a["X"].bits for a in brute_force_solutions(d, u)})
    assert orig == proj


def test_correspondence(corpus):
    from seteq.eqsys import load_system
    d = decompose_system(load_system(corpus / "systems" / "sigma_source.eq"))
    es = compile_addition_only(d)
    good = {"X": UPSet.finite([1, 3]), "A": UPSet.finite([1]), "B": UPSet.finite([2])}
    rep = verify_correspondence(d, es, [good])
    assert rep.ok and rep.readback_tracks == (13,)
    bad = verify_correspondence(d, es, [dict(good, X=UPSet.finite([4]))])
    assert not bad.ok and bad.encoded_ok == [False]
    assert parse_sidecar(es.sidecar()) == es.correspondence
    full = complete_assignment(d, good)
    assert readback(es, encode_assignment(full, es)) == full


def test_union_gadget_correspondence():
    s = parse_system('domain int\nvar X Y Z\nconst A = up "{1}"\nconst B = up "{2}"\n'
                     'eq X = union(Y, Z)\neq Y = A\neq Z = B\n')
    es = compile_addition_only(s)
    assert verify_correspondence(s, es, [{"X": UPSet.finite([1, 2]), "Y": UPSet.finite([1]),
                                          "Z": UPSet.finite([2])}]).ok


def test_compile_rejects_unnormalized():
    with pytest.raises(SystemError_):
        compile_addition_only(parse_system("domain int\nvar X\neq X = union(add(X, X), X)\n"))
