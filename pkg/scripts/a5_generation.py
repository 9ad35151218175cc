"""Check that conditional A5 words generate A5^m on a set of exponents.

The pairwise criterion (every pair of coordinates generates A5 x A5) is
compared against direct closure for a few small exponent sets.
"""

import argparse
import sys
import time

from singleprobe.group_search import build_group, generated_order, verify_generation_pairwise


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-exponent", type=int, default=29)
    ap.add_argument("--direct", type=int, default=3, help="largest m for the direct closure check")
    args = ap.parse_args()

    G = build_group("A5")
    t0 = time.perf_counter()
    rep = verify_generation_pairwise(G, range(args.max_exponent + 1))
    dt = time.perf_counter() - t0
    sizes = sorted(set(rep.pairs.values()))
    print(f"pairwise: {len(rep.pairs)} pairs, subgroup sizes {sizes}, ok={rep.ok} ({dt:.1f}s)")
    for m in range(1, args.direct + 1):
        exps = list(range(m))
        order = generated_order(G, exps)
        print(f"direct m={m} exponents {exps}: |<gens>| = {order} (|A5^{m}| = {60**m})")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
