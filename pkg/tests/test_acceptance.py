"""Acceptance criteria, each at its stated tolerance and time limit.

Every test logs one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import math
import time

import numpy as np

from qg3.campaigns import TROTTER_DELTAS, loglog_slope, run_campaign, trotter_defects
from qg3.cli import main
from qg3.geodesic import (
    STQInitialData,
    analytic_STQ_solution,
    approx_unitary,
    integrate_geodesic,
    integrate_stq,
    stq_residual,
)
from qg3.instances import random_class_vector, rng_for
from qg3.linalg import expectation_norm, spectral_norm
from qg3.metric import PenaltyWeights, cost_F, split_STQ
from qg3.schemas import example_schedule_path, read_schedule
from qg3.synthesis import slice_and_average, synthesize
from qg3.tensor_basis import _adjoint_matrix, basis_size, enumerate_basis, gell_mann, verify_bracket_closure


def test_1_basis_counts(acceptance_log):
    expected = {1: (8, 8), 2: (80, 80), 3: (728, 216), 4: (6560, 416)}
    t0 = time.perf_counter()
    got = {n: (len(enumerate_basis(n)), len(enumerate_basis(n, 2))) for n in expected}
    elapsed = time.perf_counter() - t0
    formula = all(basis_size(n, 2) == 32 * n * n - 24 * n and basis_size(n) == 9**n - 1 for n in expected)
    ok = got == expected and formula and elapsed < 1.0
    acceptance_log(1, ok, f"counts {got}, 32n^2-24n identity {formula}, {elapsed:.3f} s (< 1 s)")
    assert ok


def test_2_bracket_closure(acceptance_log):
    _adjoint_matrix.cache_clear()
    r2 = verify_bracket_closure(2, tol=1e-9)
    t0 = time.perf_counter()
    r3 = verify_bracket_closure(3, tol=1e-9)
    elapsed = time.perf_counter() - t0
    ok = r2.achieved_rank == 80 and r3.achieved_rank == 728 and elapsed < 60
    acceptance_log(
        2, ok,
        f"rank n=2 {r2.achieved_rank}/80 (depth {r2.depth_used}), n=3 {r3.achieved_rank}/728 "
        f"(depth {r3.depth_used}, ranks {list(r3.rank_by_depth)}), n=3 time {elapsed:.1f} s (< 60 s)",
    )
    assert ok


def test_3_operator_norm_facts(acceptance_log):
    l8 = spectral_norm(gell_mann(8))
    M = np.array([[0, 1], [0, 0]], dtype=complex)
    U = np.array([[1, -1j], [1j, -1]]) / math.sqrt(2)
    m1, mu1 = expectation_norm(M), expectation_norm(M @ U)
    errs = (abs(l8 - 2 / math.sqrt(3)), abs(m1 - 0.5), abs(mu1 - (0.5 + math.sqrt(2) / 4)))
    ok = errs[0] <= 1e-10 and errs[1] <= 1e-6 and errs[2] <= 1e-6
    acceptance_log(3, ok, f"||l8||={l8:.15f}, ||M||_1={m1:.12f}, ||MU||_1={mu1:.12f}; errors {errs}")
    assert ok


def test_4_power_telescoping(acceptance_log):
    t0 = time.perf_counter()
    rep = run_campaign("prop1", 1000, seed=7)
    elapsed = time.perf_counter() - t0
    dims = sorted({t.detail["dim"] for t in rep.trials})
    Ns = sorted({t.detail["N"] for t in rep.trials})
    ok = rep.all_passed and elapsed < 30 and dims == [3, 9] and Ns == list(range(2, 9))
    acceptance_log(
        4, ok,
        f"{rep.passed}/1000 pass (dims {dims}, N {Ns[0]}..{Ns[-1]}), worst margin {rep.worst_margin:.3e}, "
        f"{elapsed:.1f} s (< 30 s)",
    )
    assert ok


def test_5_mean_hamiltonian_bound(acceptance_log):
    t0 = time.perf_counter()
    rep = run_campaign("lemma4", 50, seed=5)
    elapsed = time.perf_counter() - t0
    bound_ok = all(t.margin >= 0 for t in rep.trials)
    max_ratio = max(t.detail["max_ratio"] for t in rep.trials)
    # ratio error/(c delta)^2 at delta=0.1 versus 0.01: bounded means it does not grow as delta shrinks
    growth = max(
        t.detail["cases"][f"c={c:.6g},delta=0.01"]["ratio"] / t.detail["cases"][f"c={c:.6g},delta=0.1"]["ratio"]
        for t in rep.trials
        for c in (1.0, 4 * math.sqrt(2))
    )
    ok = bound_ok and max_ratio <= 1.0 and growth <= 1.5 and elapsed < 60
    acceptance_log(
        5, ok,
        f"bound holds {sum(t.margin >= 0 for t in rep.trials)}/50, worst margin {rep.worst_margin:.3e}, "
        f"max error/(c^2 delta^2) {max_ratio:.4f}, max ratio growth delta 0.1->0.01 {growth:.3f}, {elapsed:.1f} s (< 60 s)",
    )
    assert ok


def test_6_projection_bound(acceptance_log):
    t0 = time.perf_counter()
    small = run_campaign("lemma3", 50, seed=6, sites=(1, 2))
    three = run_campaign("lemma3", 50, seed=6, sites=(3,))
    elapsed = time.perf_counter() - t0
    has3_small = any(t.detail["has_3body"] for t in small.trials)
    has3_three = all(t.detail["has_3body"] for t in three.trials)
    max_err_small = max(t.detail["error"] for t in small.trials)
    ok = small.all_passed and three.all_passed and has3_three and elapsed < 120
    acceptance_log(
        6, ok,
        f"n in {{1,2}}: {small.passed}/50 within 3^n d/p for p in {{9,81,9^n}} (no >=3-body labels exist: "
        f"any 3-body {has3_small}, max error {max_err_small:.1e}); n=3 with 3-body terms: {three.passed}/50, "
        f"worst margin {three.worst_margin:.3e}; {elapsed:.1f} s (< 120 s)",
    )
    assert ok


def _geodesic_instance(i):
    rng = rng_for(70, i)
    w = PenaltyWeights(float(rng.uniform(2.0, 100.0)), s=float(rng.uniform(0.5, 2.0)))
    parts = [random_class_vector(3, b, rng) for b in (1, 2, 3)]
    return parts, w, STQInitialData.from_coefficients(*parts, w)


def test_7_three_qutrit_geodesics(acceptance_log):
    h = 1e-4
    worst = {"residual": 0.0, "numeric_vs_analytic": 0.0, "S_drift": 0.0, "F_rel_drift": 0.0}
    for i in range(20):
        parts, w, d = _geodesic_instance(i)
        for t in np.linspace(0.05, 0.95, 5):
            vals = analytic_STQ_solution(d, t)
            plus, minus = analytic_STQ_solution(d, t + h), analytic_STQ_solution(d, t - h)
            derivs = [(a - b) / (2 * h) for a, b in zip(plus, minus)]
            worst["residual"] = max(worst["residual"], stq_residual(d, *vals, *derivs))
        for st in integrate_stq(d, 1.0, steps=1000, record_every=50):
            S, T, Q = analytic_STQ_solution(d, st.t)
            gap = max(np.max(np.abs(st.S - S)), np.max(np.abs(st.T - T)), np.max(np.abs(st.Q - Q)))
            worst["numeric_vs_analytic"] = max(worst["numeric_vs_analytic"], float(gap))
        states = integrate_geodesic(parts[0] + parts[1] + parts[2], w, 1.0, steps=1000, record_every=100)
        F0 = cost_F(states[0].H, w)
        S0 = split_STQ(states[0].L).S.to_array()
        for st in states:
            worst["S_drift"] = max(worst["S_drift"], float(np.max(np.abs(split_STQ(st.L).S.to_array() - S0))))
            worst["F_rel_drift"] = max(worst["F_rel_drift"], abs(cost_F(st.H, w) - F0) / F0)
    ok = (
        worst["residual"] <= 1e-7
        and worst["numeric_vs_analytic"] <= 1e-6
        and worst["S_drift"] <= 1e-8
        and worst["F_rel_drift"] <= 1e-6
    )
    acceptance_log(7, ok, "20 instances, worst " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert ok


def test_8_approximate_unitary_improves_with_penalty(acceptance_log):
    rng = rng_for(5)
    parts = [random_class_vector(3, b, rng) for b in (1, 2, 3)]
    gaps, full_gaps = [], []
    for p in (1e2, 1e3, 1e4):
        w = PenaltyWeights(p)
        d = STQInitialData.from_coefficients(*parts, w)
        approx = approx_unitary(d, 0.5)
        gaps.append(spectral_norm(integrate_stq(d, 0.5, steps=500)[-1].U - approx))
        full = integrate_geodesic(parts[0] + parts[1] + parts[2], w, 0.5, steps=500)[-1].U
        full_gaps.append(spectral_norm(full - approx))
    ok = gaps[0] > gaps[1] > gaps[2]
    acceptance_log(
        8, ok,
        f"||U - U~|| at t=0.5 for p=1e2,1e3,1e4 (reduced S/T/Q system): {[f'{g:.3e}' for g in gaps]}; "
        f"against the full qutrit geodesic: {[f'{g:.3e}' for g in full_gaps]}",
    )
    assert ok


def test_9_trotter_order(acceptance_log):
    rep = run_campaign("trotter", 20, seed=9)
    slopes = [t.detail["slope"] for t in rep.trials]
    sch = read_schedule(example_schedule_path())
    mean = slice_and_average(sch, 0.1)[0]
    ex_slope = loglog_slope(TROTTER_DELTAS, trotter_defects(mean))
    ok = rep.all_passed and 2.6 <= ex_slope <= 3.4
    acceptance_log(
        9, ok,
        f"slopes over delta {TROTTER_DELTAS}: random pairs {min(slopes):.3f}..{max(slopes):.3f} "
        f"({rep.passed}/20 in [2.6, 3.4]); example schedule slice {ex_slope:.3f}",
    )
    assert ok


def test_10_example_schedule_end_to_end(acceptance_log):
    sch = read_schedule(example_schedule_path())
    w = PenaltyWeights.default(sch.n)
    t0 = time.perf_counter()
    coarse = synthesize(sch, w, 0.1).budget
    fine = synthesize(sch, w, 0.05, keep_gates=False).budget
    elapsed = time.perf_counter() - t0
    ok = (
        coarse.measured_error <= 0.1
        and coarse.measured_error <= coarse.a_priori_total
        and fine.measured_error <= coarse.measured_error
        and elapsed < 120
    )
    acceptance_log(
        10, ok,
        f"n=2 d={coarse.path_length:.12g}: delta 0.1 error {coarse.measured_error:.3e} "
        f"(a priori {coarse.a_priori_total:.3f}, {coarse.gate_count} gates); delta 0.05 error "
        f"{fine.measured_error:.3e}; {elapsed:.1f} s (< 120 s)",
    )
    assert ok


def test_11_determinism(acceptance_log, tmp_path, capsys):
    commands = [
        ["synthesize", "--example", "--delta", "0.1"],
        ["--seed", "7", "verify", "prop1", "--trials", "200"],
        ["geodesic", "--mode", "compare", "--seed", "11", "--steps", "200"],
        ["sweep", "p", "--values", "1,10,100", "--n", "2", "--delta", "0.25", "--seed", "4"],
    ]
    same = []
    for cmd in commands:
        out = tmp_path / "artifact"
        blobs = []
        for _ in range(2):
            main(cmd + ["--out", str(out)])
            blobs.append(out.read_bytes())
        same.append(blobs[0] == blobs[1])
    capsys.readouterr()
    ok = all(same)
    acceptance_log(11, ok, f"byte-identical reruns for {[c[0] if c[0] != '--seed' else c[2] for c in commands]}: {same}")
    assert ok
