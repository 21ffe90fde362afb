"""Solution-preserving rewrites of whole systems."""

from __future__ import annotations

from ..numset import UPSet, up_negate
from .ast import (Add, Const, Equation, Expr, Inclusion, Negate, System, SystemError_, Union, Var,
                  rename)


def inclusion_to_equation(s: System) -> System:
    """Replace each ``φ ⊆ ψ`` by ``φ ∪ ψ = ψ``."""
    cs = tuple(Equation(Union(c.lhs, c.rhs), c.rhs) if isinstance(c, Inclusion) else c
               for c in s.constraints)
    return System(s.domain, s.variables, cs, s.output)


def _neg_name(name: str) -> str:
    return name[:-4] if name.endswith("_neg") else name + "_neg"


def _negate_expr(e: Expr) -> Expr:
    if isinstance(e, Var):
        return e
    if isinstance(e, Const):
        if isinstance(e.value, UPSet):
            return Const(_neg_name(e.name), up_negate(e.value))
        return Negate(e)
    if isinstance(e, Negate) and isinstance(e.arg, Const) and not isinstance(e.arg.value, UPSet):
        return e.arg
    if isinstance(e, (Union, Add)):
        return type(e)(_negate_expr(e.left), _negate_expr(e.right))
    raise SystemError_(f"negate_system handles union, addition and constants only, found {type(e).__name__}")


def negate_system(s: System) -> System:
    """Same system with every constant ``C`` replaced by ``-C``.

    As union and addition commute with negation, the solutions are exactly
    the negated solutions of ``s``. Applying the transform twice gives back
    ``s``.
    """
    if s.domain != "int":
        raise SystemError_("negate_system needs a system over Z")
    cs = []
    for c in s.constraints:
        cs.append(type(c)(_negate_expr(c.lhs), _negate_expr(c.rhs)))
    return System("int", s.variables, tuple(cs), s.output)


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    i = 1
    while f"{name}{i}" in taken:
        i += 1
    return f"{name}{i}"


def _relabel(s: System, taken: set[str], suffix: str) -> tuple[System, dict[str, str]]:
    mapping: dict[str, str] = {}
    for x in s.variables:
        mapping[x] = _fresh(x if x not in taken else x + suffix, taken)
        taken.add(mapping[x])
    for name in s.consts():
        new = _fresh(name if name not in taken else name + suffix, taken)
        mapping["const:" + name] = new
        taken.add(new)
    cs = tuple(type(c)(rename(c.lhs, mapping), rename(c.rhs, mapping)) for c in s.constraints)
    out = mapping.get(s.output) if s.output else None
    return System("int", tuple(mapping[x] for x in s.variables), cs, out), mapping


def assemble_pos_neg(s_pos: System, s_negpos: System, output: str = "X") -> System:
    """System for ``S`` from systems for ``S ∩ N`` and ``(-S) ∩ N``.

    Both inputs must designate an output variable and use only union and
    addition; their unique solutions over Z are assumed. Colliding names are
    renamed; the result's output variable is ``output``.
    """
    for part in (s_pos, s_negpos):
        if part.output is None:
            raise SystemError_("both systems need an output variable")
    taken: set[str] = {output}
    pos, _ = _relabel(s_pos, taken, "_p")
    neg, _ = _relabel(negate_system(System("int", s_negpos.variables, s_negpos.constraints, s_negpos.output)),
                      taken, "_n")
    x = output
    glue = Equation(Var(x), Union(Var(pos.output), Var(neg.output)))
    return System("int", (x,) + pos.variables + neg.variables,
                  (glue,) + pos.constraints + neg.constraints, x)
