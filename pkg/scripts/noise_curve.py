"""VM_1 between a partition and randomly relabeled copies of it.

    python3 scripts/noise_curve.py --communities 5 --size 20000 --trials 50
"""
import argparse
import csv
import sys

import numpy as np

from discomm.metrics import noise_curve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--communities", type=int, default=5)
    ap.add_argument("--size", type=int, default=20_000, help="nodes per community")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--max-fraction", type=float, default=0.3)
    ap.add_argument("--steps", type=int, default=31)
    ap.add_argument("--allow-same", action="store_true", help="a moved node may land in its own community")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    labels = np.repeat(np.arange(args.communities), args.size)
    fractions = np.linspace(0, args.max_fraction, args.steps)
    vm = noise_curve(labels, fractions, args.trials, args.seed, args.allow_same)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["fraction", "vm"])
    for f, v in zip(fractions, vm):
        w.writerow([f"{f:.4f}", f"{v:.5f}"])


if __name__ == "__main__":
    main()
