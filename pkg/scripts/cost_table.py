"""Conditional-step cost of a two-qubit controlled phase: fixed dyadic couplings
versus a movable probe that schedules the effective coupling (..1..2..)."""

import argparse
import sys

from singleprobe.compiler import cost_row


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>2} {'fixed':>7} {'movable':>8} {'positions(local)':>17} {'positions(generic)':>19}")
    for n in args.n:
        r = cost_row(n, args.seed)
        print(f"{r.n:>2} {r.fixed_conditional_steps:>7} {r.movable_conditional_steps:>8} "
              f"{r.movable_positions_local:>17} {r.movable_positions_generic:>19}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
