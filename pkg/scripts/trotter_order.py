"""Per-slice product-formula defect versus slice width, with fitted log-log slope.

    python3 scripts/trotter_order.py [--seed 0] [--n 2] [--terms 6]
"""

import argparse

import numpy as np

from qg3.campaigns import loglog_slope, trotter_defects
from qg3.instances import rng_for
from qg3.tensor_basis import CoefficientVector, enumerate_basis


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--terms", type=int, default=6)
    args = ap.parse_args()
    rng = rng_for(args.seed)
    labels = enumerate_basis(args.n, 2)
    picks = rng.choice(len(labels), size=args.terms, replace=False)
    mean = CoefficientVector(args.n, {labels[i]: float(rng.uniform(-1, 1)) for i in picks})
    deltas = 0.2 / 2.0 ** np.arange(6)
    defects = trotter_defects(mean, deltas)
    print("delta,defect")
    for dlt, e in zip(deltas, defects):
        print(f"{float(dlt)!r},{float(e)!r}")
    print(f"# slope {loglog_slope(deltas, defects):.4f}")


if __name__ == "__main__":
    main()
