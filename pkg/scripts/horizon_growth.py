"""Certified horizons of the digit gadgets under two input assumptions.

The input is the gadget's domain on [0, 7^D - 1]. "exact" means nothing lies
beyond the window; "open" means more elements may lie above it. For the open
case the script also counts window positions where the truncated regime
disagrees with the oracle applied to the domain on D+2 digits, which is what
the sound calculus protects against.
"""

import argparse
import math
import time

from seteq.gadgets import build_E, build_removeone, const_elements, oracle_E, oracle_removeone
from seteq.numset import Window, WindowSet

GADGETS = {"removeone": (build_removeone, oracle_removeone), "E": (build_E, oracle_E)}


def _span(h):
    return f"[{h[0]}, {h[1]}]" if h[0] <= h[1] else "empty"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-digits", type=int, default=5)
    args = ap.parse_args()
    print(f"{'gadget':<10} {'D':>2} {'exact horizon':>16} {'open horizon':>14} {'truncated errors':>17} {'time':>7}")
    for name, (build, oracle) in GADGETS.items():
        g = build()
        for d in range(2, args.max_digits + 1):
            w = Window.digits(d)
            xs = const_elements(g.domain, w)
            bits = WindowSet.from_iterable(w, xs).bits
            t0 = time.perf_counter()
            exact = g.evaluate(WindowSet.from_iterable(w, xs))
            open_ = g.evaluate(WindowSet(w, bits, None, (0, math.inf)))
            trunc = g.evaluate(WindowSet(w, bits, None, (0, math.inf)), regime="truncated")
            dt = time.perf_counter() - t0
            truth = {n for n in oracle(const_elements(g.domain, Window.digits(d + 2))) if n <= w.hi}
            errors = len(truth ^ set(trunc.elements()))
            print(f"{name:<10} {d:>2} {_span(exact.horizon):>16} {_span(open_.horizon):>14} {errors:>17} {dt:>6.3f}s")


if __name__ == "__main__":
    main()
