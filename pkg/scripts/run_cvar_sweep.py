#!/usr/bin/env python3
"""Risk dial for the private subset-generation query on the cvar6 network.

Sweeps the tail fraction optimized by the CVaR counterpart and prints the
mean / CVaR / VaR columns of the resulting loss distribution; at large
tails the rule plays the lottery, at small tails it pays a fixed privacy
premium and the columns meet.
"""

import argparse
import csv
import sys

from dpconic.apps.opf import load_network
from dpconic.experiments import cvar_q_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--network", default="cvar6")
    ap.add_argument("--subset", nargs="+", type=int, default=[0, 2, 4])
    ap.add_argument("--alpha", type=float, default=25.0)
    ap.add_argument("--eta", type=float, default=0.01)
    ap.add_argument("--q-grid", nargs="+", type=float,
                    default=[0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01])
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args()

    net = load_network(args.network)
    rows = cvar_q_sweep(net, tuple(args.subset), args.alpha, 1.0,
                        args.q_grid, eta=args.eta, opt_samples=args.samples,
                        seed=args.seed)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["q", "mean", "cvar05", "var"])
    for row in rows:
        writer.writerow([f"{v:.6g}" for v in row])
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q", "mean", "cvar05", "var"])
            for row in rows:
                w.writerow([f"{v:.10g}" for v in row])


if __name__ == "__main__":
    main()
