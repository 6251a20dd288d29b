"""Rank of the bracket closure of low-body generators, per depth.

    python3 scripts/closure_ranks.py [--max-n 3] [--generator-max-body 2]
"""

import argparse
import time

from qg3.tensor_basis import verify_bracket_closure


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--generator-max-body", type=int, default=2)
    args = ap.parse_args()
    print("n,generators,target,achieved,depth,rank_by_depth,seconds")
    for n in range(1, args.max_n + 1):
        t0 = time.perf_counter()
        rep = verify_bracket_closure(n, generator_max_body=args.generator_max_body)
        dt = time.perf_counter() - t0
        ranks = " ".join(map(str, rep.rank_by_depth))
        print(f"{n},{rep.generator_count},{rep.target_rank},{rep.achieved_rank},{rep.depth_used},{ranks},{dt:.2f}")


if __name__ == "__main__":
    main()
