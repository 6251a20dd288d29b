"""``qg3`` command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 campaign or run failure.
Every artifact embeds the run configuration and the format version string.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from qg3.campaigns import CAMPAIGNS, run_campaign
from qg3.errors import GeodesicInstabilityError, QG3Error
from qg3.geodesic import (
    TRAJECTORY_COLUMNS,
    STQInitialData,
    analytic_STQ_solution,
    analytic_trajectory_rows,
    integrate_geodesic,
    integrate_stq,
    trajectory_rows,
)
from qg3.instances import random_class_vector, random_coefficients, random_durations, rng_for
from qg3.metric import PenaltyWeights, Schedule, normalize_schedule
from qg3.schemas import example_schedule_path, read_schedule
from qg3.synthesis import FORMAT_VERSION, synthesize
from qg3.tensor_basis import MAX_DENSE_SITES, MAX_LABEL_SITES, basis_size, enumerate_basis

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_FAILURE = 0, 1, 2, 3
COMPARE_TOL = 1e-6
DEFAULT_TRIALS = {"closure": 1, "prop1": 1000, "lemma3": 50, "lemma4": 50, "trotter": 50}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(suppress=False):
    # subcommands must not overwrite values given before the command name
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=dflt(0), help="master seed (default 0)")
    common.add_argument("--out", type=Path, default=dflt(None), help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=dflt(None))
    return common


def _weights_args(p):
    p.add_argument("--p", "--penalty-p", dest="p", type=float, default=None, help="penalty on >=3-body terms (default 9^n)")
    p.add_argument("--s", "--one-body-s", dest="s", type=float, default=1.0, help="one-body weight (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qg3", description=__doc__.splitlines()[0], parents=[_common()])
    common = _common(suppress=True)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("basis", parents=[common], help="count and list Gell-Mann product labels")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--max-body", type=int, default=None)
    b.add_argument("--list", action="store_true", help="include the label list")
    b.set_defaults(func=cmd_basis)

    v = sub.add_parser("verify", parents=[common], help="run a randomized bound-verification campaign")
    v.add_argument("campaign", choices=sorted(CAMPAIGNS))
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--n", type=int, default=2, help="site count (closure only)")
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("geodesic", parents=[common], help="integrate or evaluate a geodesic")
    g.add_argument("--n", type=int, default=3)
    _weights_args(g)
    g.add_argument("--t-f", dest="t_f", type=float, default=1.0)
    g.add_argument("--steps", type=int, default=1000)
    g.add_argument("--record-every", type=int, default=10)
    g.add_argument("--mode", choices=("numeric", "analytic", "compare"), default="numeric")
    g.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("synthesize", parents=[common], help="compile a schedule into gates with an error budget")
    s.add_argument("schedule", nargs="?", default=None, help="schedule JSON file")
    s.add_argument("--example", action="store_true", help="use the shipped two-qutrit example schedule")
    _weights_args(s)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--slices-csv", type=Path, default=None)
    s.add_argument("--no-gates", action="store_true", help="omit the gate list from the report")
    s.set_defaults(func=cmd_synthesize)

    w = sub.add_parser("sweep", parents=[common], help="error budget versus p or delta")
    w.add_argument("parameter", choices=("p", "delta"))
    w.add_argument("--values", default=None, help="comma-separated values")
    w.add_argument("--schedule", default=None, help="schedule JSON file (default: shipped example for delta, seeded curve for p)")
    w.add_argument("--n", type=int, default=3, help="site count of the seeded curve (p sweep)")
    w.add_argument("--segments", type=int, default=4)
    w.add_argument("--three-body-scale", type=float, default=1e-3)
    _weights_args(w)
    w.add_argument("--delta", type=float, default=0.1)
    w.set_defaults(func=cmd_sweep)
    return ap


# output helpers

def run_config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        cfg[k] = str(v) if isinstance(v, Path) else v
    return cfg


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _csv_text(header, rows, config, comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# version: {FORMAT_VERSION}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _emit(args, text: str, summary: str | None = None):
    if args.out is None:
        sys.stdout.write(text)
        if summary:
            print(summary, file=sys.stderr)
    else:
        args.out.write_text(text)
        if summary:
            print(summary)


def _envelope(config, **payload):
    return {"version": FORMAT_VERSION, "config": config, **payload}


# commands

def cmd_basis(args) -> int:
    if not 1 <= args.n <= MAX_LABEL_SITES:
        raise UsageError(f"n={args.n} outside the supported range 1..{MAX_LABEL_SITES} (9^n-1 labels grow too fast)")
    cfg = run_config(args)
    counts = {"total": basis_size(args.n), "upto2body": basis_size(args.n, 2)}
    if args.max_body is not None:
        counts["max_body"] = basis_size(args.n, args.max_body)
    labels = enumerate_basis(args.n, args.max_body) if args.list else []
    if (args.format or "json") == "csv":
        rows = [[i, lab.weight, " ".join(map(str, lab.sites)), " ".join(map(str, lab.gm))] for i, lab in enumerate(labels)]
        comments = [f"{k}: {v}" for k, v in counts.items()]
        text = _csv_text(["index", "weight", "sites", "gm"], rows, cfg, comments)
    else:
        payload = dict(counts)
        if args.list:
            payload["labels"] = [lab.to_json() for lab in labels]
        text = _dump_json(_envelope(cfg, **payload))
    _emit(args, text, " ".join(f"{k}={v}" for k, v in counts.items()))
    return EXIT_OK


def cmd_verify(args) -> int:
    trials = DEFAULT_TRIALS[args.campaign] if args.trials is None else args.trials
    if trials < 1:
        raise UsageError(f"--trials must be >= 1, got {trials}")
    params = {}
    if args.campaign == "closure":
        if not 1 <= args.n <= MAX_DENSE_SITES:
            raise UsageError(f"closure is limited to 1 <= n <= {MAX_DENSE_SITES}, got {args.n}")
        params["n"] = args.n
    rep = run_campaign(args.campaign, trials, args.seed, workers=args.workers, **params)
    cfg = run_config(args)
    if (args.format or "json") == "csv":
        rows = [[t.trial, t.seed, int(t.passed), t.margin] for t in rep.trials]
        text = _csv_text(["trial", "seed", "passed", "margin"], rows, cfg, [f"worst_margin: {rep.worst_margin!r}"])
    else:
        text = _dump_json(_envelope(cfg, report=rep.to_json()))
    status = "pass" if rep.all_passed else "FAIL"
    _emit(args, text, f"{args.campaign}: {rep.passed}/{len(rep.trials)} {status}, worst margin {rep.worst_margin:.6g}")
    return EXIT_OK if rep.all_passed else EXIT_FAILURE


def _initial_momentum(n, w, seed):
    rng = rng_for(seed)
    if n == 3:
        return STQInitialData.from_coefficients(*(random_class_vector(3, b, rng) for b in (1, 2, 3)), w)
    total = None
    for body in range(1, n + 1):
        part = random_class_vector(n, body, rng)
        total = part if total is None else total + part
    return total


def cmd_geodesic(args) -> int:
    if not 1 <= args.n <= MAX_DENSE_SITES:
        raise UsageError(f"geodesic integration is limited to 1 <= n <= {MAX_DENSE_SITES}, got {args.n}")
    if args.mode != "numeric" and args.n != 3:
        raise UsageError(f"--mode {args.mode} needs the three-qutrit S/T/Q structure (n=3), got n={args.n}")
    if args.steps < 1 or args.record_every < 1:
        raise UsageError("--steps and --record-every must be >= 1")
    w = PenaltyWeights(float(9**args.n) if args.p is None else args.p, args.s)
    args.p = w.p
    cfg = run_config(args)
    data = _initial_momentum(args.n, w, args.seed)
    comments = []
    extra = {}

    if args.mode == "numeric":
        L0 = data if args.n != 3 else _stq_coefficients(data)
        states = integrate_geodesic(L0, w, args.t_f, steps=args.steps, record_every=args.record_every)
        rows = trajectory_rows(states, w)
    elif args.mode == "analytic":
        times = _record_times(args)
        rows = analytic_trajectory_rows(data, times)
    else:
        states = integrate_stq(data, args.t_f, steps=args.steps, record_every=args.record_every)
        rows = trajectory_rows(states, w)
        worst = 0.0
        for st in states:
            S, T, Q = analytic_STQ_solution(data, st.t)
            worst = max(worst, float(max(np.max(np.abs(st.S - S)), np.max(np.abs(st.T - T)), np.max(np.abs(st.Q - Q)))))
        extra = {"max_discrepancy": worst, "tolerance": COMPARE_TOL, "pass": worst <= COMPARE_TOL}
        comments = [f"{k}: {v!r}" for k, v in extra.items()]

    if (args.format or "csv") == "csv":
        text = _csv_text(TRAJECTORY_COLUMNS, rows, cfg, comments)
    else:
        text = _dump_json(_envelope(cfg, columns=list(TRAJECTORY_COLUMNS), rows=[list(r) for r in rows], **extra))
    summary = f"{args.mode}: {len(rows)} rows, t_f={args.t_f:g}"
    if extra:
        summary += f", max discrepancy {extra['max_discrepancy']:.3e}"
    _emit(args, text, summary)
    return EXIT_FAILURE if extra and not extra["pass"] else EXIT_OK


def _stq_coefficients(d: STQInitialData):
    from qg3.tensor_basis import CoefficientVector, encode_array

    return CoefficientVector.from_array(3, encode_array(d.S0 + d.T0 + d.Q0, 3), atol=1e-13)


def _record_times(args):
    h = args.t_f / args.steps
    ks = list(range(0, args.steps + 1, args.record_every))
    if ks[-1] != args.steps:
        ks.append(args.steps)
    return [k * h for k in ks]


def _load_schedule(path, example):
    if example and path:
        raise UsageError("give either a schedule file or --example, not both")
    if example or path is None:
        if not example:
            raise UsageError("a schedule file (or --example) is required")
        return read_schedule(example_schedule_path()), "example:n2"
    if not Path(path).is_file():
        raise UsageError(f"schedule file not found: {path}")
    return read_schedule(path), str(path)


def cmd_synthesize(args) -> int:
    sch, _ = _load_schedule(args.schedule, args.example)
    if sch.n > MAX_DENSE_SITES:
        raise UsageError(f"synthesis needs dense matrices; limited to n <= {MAX_DENSE_SITES}, got n={sch.n}")
    w = PenaltyWeights(float(9**sch.n) if args.p is None else args.p, args.s)
    args.p = w.p
    rep = synthesize(sch, w, args.delta, keep_gates=not args.no_gates)
    cfg = run_config(args)
    obj = rep.to_json()
    obj["config"] = {**cfg, **obj["config"]}
    if args.slices_csv is not None:
        args.slices_csv.write_text(_slice_rows_csv(rep, obj["config"]))
    if (args.format or "json") == "csv":
        text = _slice_rows_csv(rep, obj["config"])
    else:
        text = _dump_json(obj)
    _emit(args, text, rep.summary())
    return EXIT_OK


def _slice_rows_csv(rep, cfg):
    rows = [[s.index, s.norm_cap, s.width, s.mean_bound, s.trotter_defect] for s in rep.slices]
    return _csv_text(["slice", "c", "delta", "mean_bound", "trotter_defect"], rows, cfg)


def _parse_values(text):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--values must be comma-separated numbers: {exc}") from exc
    if not vals:
        raise UsageError("--values is empty")
    return vals


def seeded_curve(n, seed, segments=4, three_body_scale=1e-3) -> Schedule:
    """Fixed curve for p sweeps.

    Each segment has a unit-norm one/two-body part plus a >=3-body part of
    norm ``three_body_scale`` (absent when ``n < 3``).
    """
    rng = rng_for(seed)
    segs = []
    for dt in random_durations(rng, segments, 1.0):
        low = random_coefficients(n, rng, max_body=2)
        c = low / low.norm()
        if n >= 3:
            high = random_coefficients(n, rng, min_body=3)
            c = c + high * (three_body_scale / high.norm())
        segs.append((float(dt), c))
    return Schedule(n, tuple(segs))


SWEEP_COLUMNS = (
    "parameter", "value", "path_length", "projection_bound", "mean_bound_total",
    "trotter_bound_total", "a_priori_total", "measured_error", "gate_count", "hypotheses_hold",
)


def cmd_sweep(args) -> int:
    default = "1,10,100,1000" if args.parameter == "p" else "0.1,0.05,0.025"
    values = _parse_values(default if args.values is None else args.values)
    if args.parameter == "p":
        if args.schedule:
            base, _ = _load_schedule(args.schedule, False)
        else:
            if not 1 <= args.n <= MAX_DENSE_SITES:
                raise UsageError(f"sweeps are limited to 1 <= n <= {MAX_DENSE_SITES}, got {args.n}")
            base = seeded_curve(args.n, args.seed, args.segments, args.three_body_scale)
        runs = []
        for p in values:
            w = PenaltyWeights(p, args.s)
            runs.append((p, synthesize(normalize_schedule(base, w), w, args.delta, keep_gates=False)))
    else:
        base, _ = (_load_schedule(args.schedule, False) if args.schedule else _load_schedule(None, True))
        w = PenaltyWeights(float(9**base.n) if args.p is None else args.p, args.s)
        args.p = w.p
        runs = [(dv, synthesize(base, w, dv, keep_gates=False)) for dv in values]

    rows = []
    for v, rep in runs:
        b = rep.budget
        rows.append([args.parameter, float(v), b.path_length, b.projection_bound, b.mean_bound_total,
                     b.trotter_bound_total, b.a_priori_total, b.measured_error, b.gate_count, int(b.hypotheses_hold)])
    flags = {}
    if args.parameter == "p":
        ordered = [r[2] for r in sorted(rows, key=lambda r: r[1])]
        flags["path_length_nondecreasing"] = all(a <= b for a, b in zip(ordered, ordered[1:]))
    else:
        ordered = [r[7] for r in sorted(rows, key=lambda r: -r[1])]
        flags["measured_error_nonincreasing"] = all(b <= a for a, b in zip(ordered, ordered[1:]))
    cfg = run_config(args)
    if (args.format or "csv") == "csv":
        text = _csv_text(SWEEP_COLUMNS, rows, cfg, [f"{k}: {v}" for k, v in flags.items()])
    else:
        text = _dump_json(_envelope(cfg, columns=list(SWEEP_COLUMNS), rows=rows, **flags))
    _emit(args, text, f"sweep {args.parameter}: {len(rows)} rows, " + ", ".join(f"{k}={v}" for k, v in flags.items()))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"qg3: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeodesicInstabilityError as exc:
        print(f"qg3: integration failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except QG3Error as exc:
        print(f"qg3: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
