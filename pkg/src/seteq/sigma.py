"""Track encodings of sets of integers and the compiler to addition-only systems.

Integers are split into 16 tracks by residue. ``sigma(S)`` keeps ``0``,
the full tracks 6, 8, 9, 12 and carries ``n in S`` as ``16n + 13``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .numset import EMPTY, NAT, ZZ, UPSet, format_upset, up_affine, up_binary
from .eqsys.ast import Add, Const, Equation, Expr, Inclusion, System, SystemError_, Union, Var
from .eqsys.evaluate import evaluate_exact

MODULUS = 16
FULL_TRACKS = (6, 8, 9, 12)
PAYLOAD = 13
GOOD_SHIFT = UPSet.finite([0, 4, 11])
ADD_PAD = UPSet.finite([0, 1])
UNION_PAD = UPSet.finite([0, 2])


class EncodingError(ValueError):
    pass


def embed(i: int, s: UPSet) -> UPSet:
    """``{16n + i : n in s}``."""
    return up_affine(s, MODULUS, i)


def project(i: int, s: UPSet) -> UPSet:
    """``{n : 16n + i in s}``."""
    return UPSet.from_predicate(lambda n: MODULUS * n + i in s, s.period, s.reach + 1)


def _union(*xs: UPSet) -> UPSet:
    out = EMPTY
    for x in xs:
        out = up_binary("union", out, x)
    return out


@dataclass(frozen=True)
class TrackSet:
    """A set of integers seen through its 16 tracks."""

    value: UPSet

    def track(self, i: int) -> UPSet:
        """The ``i``-th track, as a subset of ``16Z + i``."""
        return up_binary("intersect", self.value, UPSet.progression(i, MODULUS))

    def track_values(self, i: int) -> UPSet:
        return project(i, self.value)

    @property
    def payload(self) -> UPSet:
        return project(PAYLOAD, self.value)

    def __contains__(self, n: int) -> bool:
        return n in self.value

    def __str__(self) -> str:
        return format_upset(self.value)


def sigma_encode(shat: UPSet, variant: str = "sigma") -> TrackSet:
    """``sigma`` (over Z) or ``sigma0`` (over N) of ``shat``."""
    if variant == "sigma":
        base = ZZ
    elif variant == "sigma0":
        base = NAT
        lo, _ = shat.bounds()
        if lo < 0:
            raise EncodingError("sigma0 encodes subsets of N only")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    parts = [UPSet.finite([0])] + [embed(i, base) for i in FULL_TRACKS] + [embed(PAYLOAD, shat)]
    return TrackSet(_union(*parts))


def sigma_decode(s: TrackSet | UPSet, variant: str = "sigma") -> UPSet:
    value = s.value if isinstance(s, TrackSet) else s
    shat = project(PAYLOAD, value)
    if variant == "sigma0":
        shat_n = up_binary("intersect", shat, NAT)
        if sigma_encode(shat_n, "sigma0").value != value:
            raise EncodingError("not a sigma0 encoding")
        return shat_n
    if sigma_encode(shat, variant).value != value:
        raise EncodingError("not a sigma encoding")
    return shat


GOOD_RHS = _union(UPSet.finite([11]),
                  *[UPSet.progression(i, MODULUS) for i in (0, 1, 3, 4, 6, 7, 8, 9, 10, 12, 13)])


def good_encoding_by_equation(x: UPSet) -> bool:
    """Does ``x + {0,4,11}`` equal the fixed right-hand side?"""
    return up_binary("add", x, GOOD_SHIFT) == GOOD_RHS


def good_encoding_by_structure(x: UPSet) -> bool:
    """Is ``x = sigma(y)`` for some ``y``? Read ``y`` off track 13 and re-encode."""
    return sigma_encode(project(PAYLOAD, x)).value == x


@dataclass(frozen=True)
class GoodEncoding:
    by_equation: bool
    by_structure: bool

    @property
    def agree(self) -> bool:
        return self.by_equation == self.by_structure

    def __bool__(self) -> bool:
        if not self.agree:
            raise AssertionError(f"good-encoding tests disagree: {self}")
        return self.by_equation


def good_encoding_check(x: UPSet | TrackSet) -> GoodEncoding:
    v = x.value if isinstance(x, TrackSet) else x
    return GoodEncoding(good_encoding_by_equation(v), good_encoding_by_structure(v))


# -- decomposition -------------------------------------------------------------------

def _fresh_names(taken: set[str], stem: str = "T"):
    k = 0
    while True:
        k += 1
        name = f"{stem}{k}"
        if name not in taken:
            taken.add(name)
            yield name


def _is_normal(c) -> bool:
    if not isinstance(c, Equation) or not isinstance(c.lhs, Var):
        return False
    r = c.rhs
    if isinstance(r, Const):
        return True
    return isinstance(r, (Add, Union)) and isinstance(r.left, Var) and isinstance(r.right, Var)


def decompose_system(s: System) -> System:
    """Equivalent system whose equations all read ``X = Y+Z``, ``X = Y∪Z`` or ``X = C``.

    Each internal node gets a fresh variable ``T1, T2, ...``; the original
    variables keep their names and their solutions. ``X = Y`` becomes
    ``X = Y ∪ Y``.
    """
    taken = set(s.variables) | set(s.consts())
    fresh = _fresh_names(taken)
    new_vars = list(s.variables)
    out: list[Equation] = []

    def name_of(e: Expr) -> str:
        """Variable equal to ``e``, emitting definitions as needed."""
        if isinstance(e, Var):
            return e.name
        t = next(fresh)
        new_vars.append(t)
        define(t, e)
        return t

    def define(x: str, e: Expr) -> None:
        if isinstance(e, Const):
            out.append(Equation(Var(x), e))
        elif isinstance(e, Var):
            out.append(Equation(Var(x), Union(e, e)))
        elif isinstance(e, (Add, Union)):
            a = name_of(e.left)
            b = name_of(e.right)
            out.append(Equation(Var(x), type(e)(Var(a), Var(b))))
        else:
            raise SystemError_(f"decompose_system handles union, addition and constants only, found {type(e).__name__}")

    for c in s.constraints:
        if isinstance(c, Inclusion):
            raise SystemError_("decompose_system needs equations; rewrite inclusions first")
        if _is_normal(c):
            out.append(c)
            continue
        lhs, rhs = (c.lhs, c.rhs) if isinstance(c.lhs, Var) or not isinstance(c.rhs, Var) else (c.rhs, c.lhs)
        if isinstance(lhs, Var):
            define(lhs.name, rhs)
        else:
            a, b = name_of(lhs), name_of(rhs)
            out.append(Equation(Var(a), Union(Var(b), Var(b))))
    return System(s.domain, tuple(new_vars), tuple(out), s.output)


# -- compilation -----------------------------------------------------------------------

@dataclass
class EncodedSystem:
    """Addition-only system plus the ``variable -> (encoded variable, track)`` map."""

    system: System
    correspondence: dict[str, tuple[str, int]] = field(default_factory=dict)

    def sidecar(self) -> str:
        return "".join(f"{k} -> {v}, {t}\n" for k, (v, t) in self.correspondence.items())


def parse_sidecar(text: str) -> dict[str, tuple[str, int]]:
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        k, _, rest = line.partition("->")
        v, _, t = rest.partition(",")
        out[k.strip()] = (v.strip(), int(t))
    return out


def _up_const(name: str, value: UPSet) -> Const:
    return Const(name, value)


def compile_addition_only(s: System, prefix: str = "S_") -> EncodedSystem:
    """Simulate a normal-form ``{∪, +}`` system with addition only.

    Every variable ``X`` becomes ``S_X`` standing for ``sigma(X)``.
    """
    if s.domain != "int":
        raise SystemError_("compile_addition_only works over Z")
    enc = {x: prefix + x for x in s.variables}
    taken = set(enc.values())
    if len(taken) != len(enc):
        raise SystemError_("encoded variable names collide")
    good = _up_const("GOOD", GOOD_RHS)
    shift = _up_const("GOODSHIFT", GOOD_SHIFT)
    pad1 = _up_const("PAD01", ADD_PAD)
    pad2 = _up_const("PAD02", UNION_PAD)
    sig0 = _up_const("SIGMA0", sigma_encode(UPSet.finite([0])).value)
    cs: list[Equation] = []
    for c in s.constraints:
        if not _is_normal(c):
            raise SystemError_("compile_addition_only needs a system in normal form; run decompose_system")
        x = Var(enc[c.lhs.name])
        r = c.rhs
        if isinstance(r, Const):
            if not isinstance(r.value, UPSet):
                raise SystemError_(f"constant {r.name!r} must be ultimately periodic")
            cs.append(Equation(x, Const(f"SIGMA_{r.name}", sigma_encode(r.value).value)))
            continue
        y, z = Var(enc[r.left.name]), Var(enc[r.right.name])
        if isinstance(r, Add):
            cs.append(Equation(Add(Add(y, z), pad1), Add(Add(x, sig0), pad1)))
        else:
            cs.append(Equation(Add(Add(y, z), pad2), Add(Add(x, x), pad2)))
    for v in s.variables:
        cs.append(Equation(Add(Var(enc[v]), shift), good))
    out = enc[s.output] if s.output else None
    system = System("int", tuple(enc[v] for v in s.variables), tuple(cs), out)
    return EncodedSystem(system, {v: (enc[v], PAYLOAD) for v in s.variables})


def encode_assignment(a: dict[str, UPSet], es: EncodedSystem) -> dict[str, UPSet]:
    return {es.correspondence[k][0]: sigma_encode(v).value for k, v in a.items()}


def readback(es: EncodedSystem, encoded: dict[str, UPSet]) -> dict[str, UPSet]:
    return {k: project(t, encoded[v]) for k, (v, t) in es.correspondence.items()}


@dataclass
class CorrespondenceReport:
    original_ok: list[bool]
    encoded_ok: list[bool]
    roundtrip_ok: list[bool]
    readback_tracks: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return all(self.original_ok) and all(self.encoded_ok) and all(self.roundtrip_ok)


def _satisfies(s: System, a: dict[str, UPSet]) -> bool:
    for c in s.constraints:
        lhs = evaluate_exact(c.lhs, a, s.domain)
        rhs = evaluate_exact(c.rhs, a, s.domain)
        if isinstance(c, Equation) and lhs != rhs:
            return False
        if isinstance(c, Inclusion) and up_binary("union", lhs, rhs) != rhs:
            return False
    return True


def complete_assignment(s: System, a: dict[str, UPSet]) -> dict[str, UPSet]:
    """Fill in auxiliary variables of a decomposed system from their defining equations."""
    a = dict(a)
    defs = {c.lhs.name: c.rhs for c in s.constraints if isinstance(c, Equation) and isinstance(c.lhs, Var)}
    pending = [x for x in s.variables if x not in a]
    while pending:
        ready = [x for x in pending if x in defs and defs[x].variables() <= set(a)]
        if not ready:
            raise SystemError_(f"cannot derive values for {sorted(pending)}")
        for x in ready:
            a[x] = evaluate_exact(defs[x], a, s.domain)
        pending = [x for x in pending if x not in a]
    return a


def verify_correspondence(s: System, es: EncodedSystem, samples: list[dict[str, UPSet]]) -> CorrespondenceReport:
    """Encode exact solutions of ``s``, check them against ``es`` and read them back.

    ``readback_tracks`` lists every track ``t`` for which ``{n : 16n+t in T}``
    gives back the original values in all samples.
    """
    orig, encd, rt = [], [], []
    tracks = set(range(MODULUS))
    for a in samples:
        a = complete_assignment(s, a)
        orig.append(_satisfies(s, a))
        e = encode_assignment(a, es)
        encd.append(_satisfies(es.system, e))
        rt.append(readback(es, e) == a)
        for t in list(tracks):
            if any(project(t, e[es.correspondence[k][0]]) != v for k, v in a.items()):
                tracks.discard(t)
    return CorrespondenceReport(orig, encd, rt, tuple(sorted(tracks)))
