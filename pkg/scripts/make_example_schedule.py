"""Regenerate the shipped two-qutrit example schedule.

Sixteen unit-cost segments with random durations summing to one, so the
path length is exactly 1. Usage:

    python3 scripts/make_example_schedule.py [--seed 2024] [--out src/qg3/data/example_n2.json]
"""

import argparse
import json
from pathlib import Path

from qg3.instances import random_schedule, rng_for
from qg3.metric import PenaltyWeights, path_length

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "qg3" / "data" / "example_n2.json"


def format_schedule(obj) -> str:
    """One term per line; still plain JSON."""
    segs = []
    for seg in obj["segments"]:
        terms = ",\n    ".join(json.dumps(t) for t in seg["terms"])
        segs.append(f'  {{"dt": {seg["dt"]!r},\n   "terms": [\n    {terms}]}}')
    body = ",\n".join(segs)
    return f'{{"version": "qg3-v1", "n": {obj["n"]},\n "segments": [\n{body}]}}\n'


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--segments", type=int, default=16)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()

    w = PenaltyWeights.default(2)
    sch = random_schedule(2, rng_for(args.seed), w, segments=args.segments, total=1.0)
    args.out.write_text(format_schedule(sch.to_json()))
    print(f"wrote {args.out} (segments={len(sch)}, d={path_length(sch, w):.15g})")


if __name__ == "__main__":
    main()
