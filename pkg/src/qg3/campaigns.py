"""Randomized bound-verification campaigns (one per inequality).

Every trial draws from its own generator seeded with ``seed + trial`` so that
results do not depend on execution order; with ``workers > 1`` trials run in a
thread pool and are collected in trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qg3.geodesic import evolve_schedule
from qg3.instances import random_bounded_schedule, random_coefficients, rng_for
from qg3.linalg import hermitian_expm, random_hermitian, random_unitary, spectral_norm, unitary_power_gap
from qg3.metric import PenaltyWeights, Schedule, path_length
from qg3.synthesis import mean_bound, norm_cap_12body, project_12body, time_average, trotter_slice
from qg3.tensor_basis import CoefficientVector, decode, enumerate_basis, verify_bracket_closure

TROTTER_DELTAS = (0.1, 0.05, 0.025)
TROTTER_SLOPE_RANGE = (2.6, 3.4)
MEAN_BOUND_CAPS = (1.0, norm_cap_12body(1))
MEAN_BOUND_DELTAS = (0.1, 0.01)
PROJECTION_PENALTIES = (9.0, 81.0)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    passed: bool
    margin: float
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"trial": self.trial, "seed": self.seed, "passed": self.passed, "margin": self.margin, **self.detail}


@dataclass(frozen=True)
class CampaignReport:
    name: str
    params: dict
    trials: tuple

    @property
    def passed(self) -> int:
        return sum(t.passed for t in self.trials)

    @property
    def all_passed(self) -> bool:
        return self.passed == len(self.trials)

    @property
    def worst_margin(self) -> float:
        return min(t.margin for t in self.trials)

    def to_json(self):
        return {
            "campaign": self.name,
            "params": self.params,
            "passed": self.passed,
            "total": len(self.trials),
            "all_passed": self.all_passed,
            "worst_margin": self.worst_margin,
            "trials": [t.to_json() for t in self.trials],
        }


def _power_gap_trial(trial, seed, tol=1e-10):
    rng = rng_for(seed, trial)
    dim = (3, 9)[trial % 2]
    N = 2 + (trial // 2) % 7
    A = random_unitary(dim, rng)
    if trial % 4 < 2:
        # nearby pairs make the inequality non-trivial
        eps = 10 ** rng.uniform(-6, 0)
        B = hermitian_expm(random_hermitian(dim, rng), eps) @ A
    else:
        B = random_unitary(dim, rng)
    gap = unitary_power_gap(A, B, N)
    margin = gap.rhs + tol - gap.lhs
    return TrialResult(trial, seed + trial, margin >= 0, margin, {"dim": dim, "N": N, "lhs": gap.lhs, "rhs": gap.rhs})


def _raw_schedule(n, rng, segments=4, total=1.0):
    dts = rng.uniform(0.5, 1.5, size=segments)
    dts *= total / dts.sum()
    segs = []
    for dt in dts:
        c = random_coefficients(n, rng)
        segs.append((float(dt), c / c.norm()))
    return Schedule(n, tuple(segs))


def _projection_trial(trial, seed, sites=(1, 2, 3)):
    rng = rng_for(seed, trial)
    n = sites[trial % len(sites)]
    sch = _raw_schedule(n, rng)
    U = evolve_schedule(sch)
    U_P = evolve_schedule(project_12body(sch))
    err = spectral_norm(U - U_P)
    checks = {}
    margin = math.inf
    for p in PROJECTION_PENALTIES + (float(9**n),):
        d = path_length(sch, PenaltyWeights(p))
        bound = 3**n * d / p
        checks[f"p={p:g}"] = {"d": d, "bound": bound}
        margin = min(margin, bound - err)
    return TrialResult(
        trial, seed + trial, margin >= 0, margin,
        {"n": n, "error": err, "has_3body": sch.segments[0][1].max_body >= 3, "checks": checks},
    )


def _mean_hamiltonian_trial(trial, seed, sites=(1, 2)):
    n = sites[trial % len(sites)]
    results = {}
    margin = math.inf
    max_ratio = 0.0
    for c in MEAN_BOUND_CAPS:
        for delta in MEAN_BOUND_DELTAS:
            # same shape for every (c, delta): restart the generator
            sch = random_bounded_schedule(n, rng_for(seed, trial), c, delta)
            U = evolve_schedule(sch)
            mean = time_average(sch)
            err = spectral_norm(U - hermitian_expm(decode(mean), delta))
            bound = mean_bound(c, delta)
            ratio = err / (c * delta) ** 2
            results[f"c={c:.6g},delta={delta:g}"] = {"error": err, "bound": bound, "ratio": ratio}
            margin = min(margin, bound - err)
            max_ratio = max(max_ratio, ratio)
    ok = margin >= 0 and max_ratio <= 1.0
    return TrialResult(trial, seed + trial, ok, margin, {"n": n, "max_ratio": max_ratio, "cases": results})


def trotter_defects(mean: CoefficientVector, deltas=TROTTER_DELTAS):
    out = []
    for delta in deltas:
        exact = hermitian_expm(decode(mean), delta)
        out.append(spectral_norm(exact - trotter_slice(mean, delta).realize()))
    return out


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _trotter_trial(trial, seed, n=2):
    rng = rng_for(seed, trial)
    labels = enumerate_basis(n, 2)
    while True:
        a, b = rng.choice(len(labels), size=2, replace=False)
        A = decode(CoefficientVector.single(labels[a]))
        B = decode(CoefficientVector.single(labels[b]))
        if spectral_norm(A @ B - B @ A) > 1e-6:
            break
    h = rng.uniform(0.3, 1.0, size=2) * rng.choice([-1.0, 1.0], size=2)
    mean = CoefficientVector(n, {labels[a]: h[0], labels[b]: h[1]})
    defects = trotter_defects(mean)
    slope = loglog_slope(TROTTER_DELTAS, defects)
    lo, hi = TROTTER_SLOPE_RANGE
    margin = min(slope - lo, hi - slope)
    return TrialResult(
        trial, seed + trial, lo <= slope <= hi, margin,
        {"labels": [labels[a].to_json(), labels[b].to_json()], "defects": defects, "slope": slope},
    )


def _closure_trial(trial, seed, n=2):
    rep = verify_bracket_closure(n)
    return TrialResult(trial, seed, rep.spans, float(rep.achieved_rank - rep.target_rank), rep.to_json())


CAMPAIGNS = {
    "closure": _closure_trial,
    "prop1": _power_gap_trial,
    "lemma3": _projection_trial,
    "lemma4": _mean_hamiltonian_trial,
    "trotter": _trotter_trial,
}


def run_campaign(name: str, trials: int, seed: int, workers: int = 1, **params) -> CampaignReport:
    """Run ``trials`` independent trials of campaign ``name``."""
    if name not in CAMPAIGNS:
        raise KeyError(f"unknown campaign {name!r}; choose from {sorted(CAMPAIGNS)}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    fn = CAMPAIGNS[name]
    if name == "closure":
        trials = 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda i: fn(i, seed, **params), range(trials)))
    else:
        results = [fn(i, seed, **params) for i in range(trials)]
    return CampaignReport(name, {"trials": trials, "seed": seed, **params}, tuple(results))
