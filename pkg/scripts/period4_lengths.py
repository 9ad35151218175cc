"""Minimal number of conditional D8 words for every period-4 function on 8 eigenvalues."""

import argparse
import sys

from singleprobe.control_ir import BoolFunc, SpectrumSpec
from singleprobe.group_search import build_group, minimal_lengths


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mode", choices=("strict", "state_level"), default="state_level")
    ap.add_argument("--max-len", type=int, default=5)
    args = ap.parse_args()

    spec = SpectrumSpec.dyadic(3)
    patterns = [[(bits >> r) & 1 for r in range(4)] for bits in range(16)]
    targets = [BoolFunc.from_callable(spec, lambda j, p=p: p[j % 4]) for p in patterns]
    results = minimal_lengths(build_group("D8"), spec, targets, args.mode, (1, 0, 0), args.max_len)
    for p, (_, res) in zip(patterns, results):
        print("".join(map(str, p)), "-" if res is None else res.length)
    return 0


if __name__ == "__main__":
    sys.exit(main())
