"""Kleene iteration counts and wall time for the appendthreesix system."""

import argparse
import time

from seteq.eqsys import kleene_solve
from seteq.gadgets import build_appendthreesix, oracle_append
from seteq.numset import UPSet, Window


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-digits", type=int, default=6)
    ap.add_argument("--seed", default="9,10")
    args = ap.parse_args()
    seed = UPSet.finite(int(x) for x in args.seed.split(","))
    s = build_appendthreesix(seed)
    print(f"{'D':>2} {'mode':<9} {'iters':>5} {'|Y|':>6} {'oracle':>6} {'time':>8}")
    for d in range(2, args.max_digits + 1):
        w = Window.digits(d)
        expect = oracle_append(seed.exceptions, w)
        for mode in ("least", "greatest"):
            t0 = time.perf_counter()
            values, report = kleene_solve(s, w, mode)
            dt = time.perf_counter() - t0
            y = set(values["Y"].elements())
            print(f"{d:>2} {mode:<9} {report.iterations:>5} {len(y):>6} {'=' if y == expect else '!=':>6} {dt:>7.3f}s")


if __name__ == "__main__":
    main()
