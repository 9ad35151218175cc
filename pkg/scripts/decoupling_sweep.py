"""Leakage of the full exchange evolution away from the z-only interaction.

Bang-bang: symmetric pulse cycles, doubling m.  Strong field: B in
multiples of ||S_x||.  Random couplings in [0.1, 1] on two register qubits.
"""

import argparse
import sys

import numpy as np

from singleprobe import dynamics as dyn


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--time", type=float, default=1.0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    c = rng.uniform(0.1, 1.0, args.n)
    psi = rng.normal(size=2 ** (args.n + 1)) + 1j * rng.normal(size=2 ** (args.n + 1))
    s = dyn.JointState(psi / np.linalg.norm(psi))
    print(f"couplings {np.round(c, 4).tolist()}")
    print("m      bang-bang leakage")
    prev = None
    for m in (1, 2, 4, 8, 16, 32, 64, 128):
        leak = dyn.decouple_bangbang(s, c, "z", args.time, m).leakage
        ratio = "" if prev is None else f"  ratio {prev / leak:.2f}"
        print(f"{m:<6} {leak:.3e}{ratio}")
        prev = leak
    nx = dyn.transverse_norm(c)
    print("B/||Sx||  strong-field leakage")
    for f in (0, 1, 3, 10, 30, 100, 300):
        print(f"{f:<9} {dyn.decouple_strong_field(s, c, f * nx, args.time).leakage:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
