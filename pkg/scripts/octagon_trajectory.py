"""Probe positions on the octagon after each word of the three-step D8 procedure."""

import argparse
import csv
import math
import sys

from singleprobe.control_ir import SpectrumSpec, bloch_trajectory
from singleprobe.synthesis import synth_f32_d8


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", help="also write the raw trajectory here")
    args = ap.parse_args()

    spec = SpectrumSpec.dyadic(3)
    rows = bloch_trajectory(synth_f32_d8(spec), (1.0, 0.0, 0.0))
    angles = {}
    for j, step, v in rows:
        angles.setdefault(step, {})[j] = round(math.degrees(math.atan2(v[1], v[0]))) % 360
    print("step  " + "  ".join(f"j={j}" for j in spec.distinct))
    for step in sorted(angles):
        print(f"{step:>4}  " + "  ".join(f"{angles[step][j]:>3}" for j in spec.distinct))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eigenvalue", "step", "bloch_x", "bloch_y", "bloch_z"])
            for j, step, v in rows:
                w.writerow([j, step] + [f"{c + 0.0:.12g}" for c in v])
    return 0


if __name__ == "__main__":
    sys.exit(main())
