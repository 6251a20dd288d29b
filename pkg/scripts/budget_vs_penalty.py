"""Error budget of a fixed three-qutrit curve as the penalty grows.

Thin wrapper over ``qg3 sweep p``; writes CSV to stdout.

    python3 scripts/budget_vs_penalty.py [--seed 0] [--delta 0.1]
"""

import argparse
import sys

from qg3.cli import main as qg3_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--values", default="1,3,10,30,100,300,1000")
    args = ap.parse_args()
    return qg3_main(["sweep", "p", "--values", args.values, "--delta", str(args.delta), "--seed", str(args.seed)])


if __name__ == "__main__":
    sys.exit(main())
