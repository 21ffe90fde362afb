"""Command-line front end.

Exit codes: 0 success (satisfied / member / well-founded), 1 negative
verdict (violated / not a member / not well-founded), 2 input errors
(unparsable files, bad arguments), 3 regime errors (question lies beyond
the certified horizon, brute-force cap exceeded, non-UP constant in an
exact check).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .digits import PatternSyntaxError, compile_pattern
from .numset import HorizonError, UPSet, Window, WindowSet, format_upset, parse_upset
from .eqsys import (Equation, System, Var, DSLError, RegimeError, SolveError, SystemError_, brute_force_solutions,
                    check_solution, format_system, kleene_solve, load_system, window_of_upset)
from .eqsys.solve import SATISFIED, UNKNOWN
from . import gadgets, hyparith, sigma

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_REGIME = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    window: Window
    mode: str = "least"
    regime: str = "horizon"
    fmt: str = "human"

    def __post_init__(self):
        if self.window.size < 1:
            raise ValueError("window must contain at least one point")


class Printer:
    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout

    def human(self, line: str = "") -> None:
        if self.fmt == "human":
            print(line, file=self.out)

    def record(self, **fields) -> None:
        if self.fmt == "records":
            print(json.dumps(fields, sort_keys=True, ensure_ascii=False), file=self.out)


def format_elements(elems) -> str:
    elems = sorted(elems)
    return "{" + ", ".join(map(str, elems)) + "}" if elems else "∅"


def _window_arg(text: str) -> Window:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("expected LO:HI")
    return Window(int(lo), int(hi))


def _universe_arg(text: str):
    return _window_arg(text) if ":" in text else int(text)


def _window(args) -> Window:
    if getattr(args, "window", None) is not None:
        return args.window
    d = getattr(args, "digits", None) or 3
    if d < 1:
        raise ValueError("--digits must be at least 1")
    return Window.digits(d)


def load_assignment(path) -> dict[str, UPSet]:
    """Lines ``NAME = <set>`` in the textual UPSet form; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, sep, body = line.partition("=")
            if not sep:
                raise DSLError("expected NAME = SET", no)
            try:
                out[name.strip()] = parse_upset(body.strip())
            except ValueError as e:
                raise DSLError(str(e), no) from None
    return out


def format_assignment(a: dict[str, UPSet]) -> str:
    return "".join(f"{k} = {format_upset(v)}\n" for k, v in sorted(a.items()))


def _print_values(p: Printer, values: dict[str, WindowSet]) -> None:
    for k in sorted(values):
        ws = values[k]
        hz = list(ws.horizon) if ws.horizon[0] <= ws.horizon[1] else None
        p.human(f"{k} = {format_elements(ws.elements())}   horizon {hz if hz else 'empty'}")
        p.record(record="value", var=k, elements=sorted(ws.elements()), horizon=hz)


def _print_report(p: Printer, report) -> None:
    p.human(report.summary())
    for r in report.records():
        p.record(**r)


def _status_code(status: str) -> int:
    return EXIT_OK if status == SATISFIED else EXIT_REGIME if status == UNKNOWN else EXIT_NO


# -- subcommands ---------------------------------------------------------------------

def cmd_solve(args, p: Printer) -> int:
    s = load_system(args.file)
    cfg = RunConfig("solve", _window(args), args.mode, args.regime, args.format)
    values, report = kleene_solve(s, cfg.window, cfg.mode, cfg.regime)
    _print_values(p, values)
    _print_report(p, report)
    return _status_code(report.status)


def cmd_check(args, p: Printer) -> int:
    s = load_system(args.file)
    a = load_assignment(args.assignment)
    if args.window is None and args.digits is None:
        report = check_solution(s, a, regime="exact")
    else:
        w = _window(args)
        report = check_solution(s, {k: window_of_upset(v, w) for k, v in a.items()}, w, args.regime)
    _print_report(p, report)
    return _status_code(report.status)


def cmd_brute(args, p: Printer) -> int:
    s = load_system(args.file)
    sols = brute_force_solutions(s, args.universe, workers=args.workers)
    p.human(f"{len(sols)} solutions")
    p.record(record="brute", solutions=len(sols))
    for i, a in enumerate(sols, 1):
        body = ", ".join(f"{k} = {format_elements(a[k].elements())}" for k in sorted(a))
        p.human(f"  #{i}: {body}")
        p.record(record="solution", index=i, values={k: sorted(a[k].elements()) for k in sorted(a)})
    return EXIT_OK


def _gadget_system(g: gadgets.GadgetExpr) -> System:
    return System("nat", ("X", "Y"), (Equation(Var("Y"), g.expr),), "Y")


def build_system(name: str, args) -> System:
    """The DSL-serializable system behind ``seteq build NAME``."""
    if name == "removeone":
        return _gadget_system(gadgets.build_removeone())
    if name == "E":
        return _gadget_system(gadgets.build_E())
    if name == "appendthreesix":
        seed = parse_upset(args.seed) if args.seed else UPSet.finite([9])
        return gadgets.build_appendthreesix(seed)
    if name == "A":
        if not (args.S and args.St):
            raise ValueError("build A needs --S and --St")
        return gadgets.build_A(parse_upset(args.S), parse_upset(args.St))
    if name == "arith":
        if not (args.relation and args.prefix):
            raise ValueError("build arith needs --relation and --prefix")
        r = compile_pattern(args.relation)
        k = len(gadgets.parse_prefix(args.prefix))
        return gadgets.build_arith(r, args.prefix, gadgets.arith_domain(k) - r)
    raise ValueError(f"unknown gadget {name!r}")


def cmd_build(args, p: Printer) -> int:
    text = format_system(build_system(args.gadget, args))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        p.human(f"wrote {args.output}")
        p.record(record="build", gadget=args.gadget, path=args.output)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sigma_compile(args, p: Printer) -> int:
    s = load_system(args.file)
    es = sigma.compile_addition_only(sigma.decompose_system(s))
    text = format_system(es.system)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        side = args.output + ".sidecar"
        with open(side, "w", encoding="utf-8") as fh:
            fh.write(es.sidecar())
        p.human(f"wrote {args.output} and {side}")
        p.record(record="compile", path=args.output, sidecar=side, constraints=len(es.system.constraints))
    else:
        sys.stdout.write(text)
        sys.stdout.write("".join("# " + line + "\n" for line in es.sidecar().splitlines()))
    return EXIT_OK


def cmd_member(args, p: Printer) -> int:
    s = load_system(args.file)
    if args.var not in s.variables:
        raise DSLError(f"no variable {args.var!r}")
    if args.assignment:
        a = load_assignment(args.assignment)
        report = check_solution(s, a, regime="exact")
        if not report.ok:
            _print_report(p, report)
            return EXIT_NO
        ans = args.n in a[args.var]
    else:
        values, _ = kleene_solve(s, _window(args), args.mode, args.regime)
        ans = values[args.var].member(args.n)
    p.human(f"{args.n} {'∈' if ans else '∉'} {args.var}")
    p.record(record="member", var=args.var, n=args.n, member=ans)
    return EXIT_OK if ans else EXIT_NO


def cmd_spec_check(args, p: Printer) -> int:
    spec = hyparith.load_spec(args.spec)
    wf = hyparith.check_well_founded(spec)
    if not wf:
        cyc = " -> ".join(map(str, wf.cycle))
        p.human(f"not well-founded: cycle {cyc}")
        p.record(record="spec", well_founded=False, cycle=list(wf.cycle))
        return EXIT_NO
    b = hyparith.RingSets(spec).B(spec.root)
    p.human(f"well-founded; B_{spec.root} = {format_upset(b)}")
    p.record(record="spec", well_founded=True, root=spec.root, target=format_upset(b))
    if args.digits:
        report, _ = hyparith.check_HA(spec, args.digits)
        _print_report(p, report)
        return _status_code(report.status)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _add_window(sp) -> None:
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--digits", type=int, help="window [0, 7^D - 1]")
    g.add_argument("--window", type=_window_arg, help="window LO:HI")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seteq", description="Equations over sets of integers.")
    ap.add_argument("--format", choices=("human", "records"), default="human")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "records"), default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name: str, help: str):
        return sub.add_parser(name, help=help, parents=[common])

    sp = cmd("solve", help="least or greatest fixed point on a window")
    sp.add_argument("file")
    _add_window(sp)
    sp.add_argument("--mode", choices=("least", "greatest"), default="least")
    sp.add_argument("--regime", choices=("horizon", "truncated"), default="horizon")

    sp = cmd("check", help="check an assignment file against a system")
    sp.add_argument("file")
    sp.add_argument("assignment")
    _add_window(sp)
    sp.add_argument("--regime", choices=("horizon", "truncated"), default="horizon")

    sp = cmd("brute", help="all solutions on a small universe")
    sp.add_argument("file")
    sp.add_argument("--universe", type=_universe_arg, default=8, help="U (meaning 0..U) or LO:HI")
    sp.add_argument("--workers", type=int, default=None)

    sp = cmd("build", help="emit a gadget system in the DSL")
    sp.add_argument("gadget", choices=("removeone", "E", "appendthreesix", "A", "arith"))
    sp.add_argument("-o", "--output")
    sp.add_argument("--seed", help="appendthreesix seed (UPSet text)")
    sp.add_argument("--S", dest="S", help="A: the set S (UPSet text)")
    sp.add_argument("--St", dest="St", help="A: the set S~ (UPSet text)")
    sp.add_argument("--relation", help="arith: relation R as a digit pattern")
    sp.add_argument("--prefix", help="arith: quantifier prefix such as EA")

    sp = cmd("sigma-compile", help="compile a {union, +} system to addition only")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = cmd("member", help="membership of N in a variable's value")
    sp.add_argument("file")
    sp.add_argument("var")
    sp.add_argument("n", type=int)
    sp.add_argument("--assignment", help="exact assignment file instead of solving")
    _add_window(sp)
    sp.add_argument("--mode", choices=("least", "greatest"), default="least")
    sp.add_argument("--regime", choices=("horizon", "truncated"), default="horizon")

    sp = cmd("spec-check", help="well-foundedness of a sigma-ring spec")
    sp.add_argument("spec")
    sp.add_argument("--digits", type=int, help="also check the eight constraints on this many digits")
    return ap


COMMANDS = {
    "solve": cmd_solve, "check": cmd_check, "brute": cmd_brute, "build": cmd_build,
    "sigma-compile": cmd_sigma_compile, "member": cmd_member, "spec-check": cmd_spec_check,
}


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    p = Printer(args.format)
    try:
        return COMMANDS[args.command](args, p)
    except (HorizonError, RegimeError, SolveError) as e:
        print(f"seteq: regime error: {e}", file=sys.stderr)
        return EXIT_REGIME
    except (DSLError, PatternSyntaxError, hyparith.SpecError, SystemError_, gadgets.GadgetError,
            OSError, ValueError) as e:
        print(f"seteq: input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
