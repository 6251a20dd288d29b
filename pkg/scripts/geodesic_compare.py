"""Three-qutrit geodesics: closed form, reduced integration and full equation side by side.

Prints, for a few penalties, the max deviation of the reduced integration from
the closed form, the distance between the full geodesic and the closed form,
and the gap between the reduced-system unitary and its large-p approximation.

    python3 scripts/geodesic_compare.py [--seed 11] [--t 1.0] [--steps 1000]
"""

import argparse

import numpy as np

from qg3.geodesic import STQInitialData, analytic_STQ_solution, approx_unitary, integrate_geodesic, integrate_stq
from qg3.instances import random_class_vector, rng_for
from qg3.linalg import spectral_norm
from qg3.metric import PenaltyWeights, split_STQ
from qg3.tensor_basis import decode


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--s", type=float, default=1.0)
    args = ap.parse_args()
    rng = rng_for(args.seed)
    parts = [random_class_vector(3, b, rng) for b in (1, 2, 3)]
    print("p,reduced_vs_closed_form,full_vs_closed_form_T,approx_unitary_gap")
    for p in (10.0, 100.0, 1000.0, 10000.0):
        w = PenaltyWeights(p, args.s)
        d = STQInitialData.from_coefficients(*parts, w)
        red = integrate_stq(d, args.t, steps=args.steps)[-1]
        _, T, Q = analytic_STQ_solution(d, args.t)
        red_gap = float(max(np.max(np.abs(red.T - T)), np.max(np.abs(red.Q - Q))))
        full = integrate_geodesic(parts[0] + parts[1] + parts[2], w, args.t, steps=args.steps)[-1]
        full_gap = spectral_norm(decode(split_STQ(full.L).T) - T)
        approx_gap = spectral_norm(red.U - approx_unitary(d, args.t))
        print(f"{p!r},{red_gap!r},{full_gap!r},{approx_gap!r}")


if __name__ == "__main__":
    main()
