"""Geodesics of the penalty metric and the three-qutrit S/T/Q example.

The momentum ``L = G(H)`` obeys ``dL/dt = i[L, G^{-1}(L)]`` and the
accumulated unitary obeys ``dU/dt = -i H U``. Both are integrated with the
classical fourth-order Runge-Kutta scheme at fixed step, in coefficient space
(dense matrices only for the bracket).

For three qutrits the module also provides the closed-form solution of the
reduced S/T/Q system

    dS/dt = 0
    dT/dt = i[(1 - 1/s) S + (1 - 1/p) Q, T]
    dQ/dt = i(1/p - 1/s)[S, Q]

together with a numerical integrator for that same system. For qutrits
``[T, Q]`` is not confined to the two-body subspace, so the reduced system is
not identical to the full geodesic equation; :func:`integrate_geodesic`
integrates the full equation and :func:`integrate_stq` the reduced one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from qg3.errors import DegenerateSpectrumError, DimensionError, GeodesicInstabilityError, ValidationError
from qg3.linalg import hermitian_expm, spectral_norm, unitarity_defect
from qg3.metric import PenaltyWeights, Schedule, g_scale, metric_diagonal
from qg3.tensor_basis import (
    CoefficientVector,
    decode,
    decode_array,
    encode_array,
    label_weights,
)

DEFAULT_STEPS_PER_UNIT_TIME = 1000
MAX_ENERGY_DRIFT = 1e-3
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class GeodesicState:
    t: float
    L: CoefficientVector
    H: CoefficientVector
    U: np.ndarray


def _rhs(l, n, inv_scale):
    return _rhs_with_h(l, n, inv_scale)[0]


def _rhs_with_h(l, n, inv_scale):
    L, H = decode_array(np.stack([l, l * inv_scale]), n)
    return encode_array(1j * (L @ H - H @ L), n), H


def geodesic_rhs(L: CoefficientVector, w: PenaltyWeights) -> CoefficientVector:
    """``i[L, G^{-1}(L)]`` as a coefficient vector."""
    inv = 1.0 / g_scale(L.n, w)
    return CoefficientVector.from_array(L.n, _rhs(L.to_array(), L.n, inv), atol=1e-13)


def _energy(l, inv_scale, diag):
    h = l * inv_scale
    return float(np.sum(diag * h * h))


def integrate_geodesic(
    L0: CoefficientVector,
    w: PenaltyWeights,
    t_f: float,
    steps: int | None = None,
    record_every: int = 1,
    max_drift: float = MAX_ENERGY_DRIFT,
) -> list[GeodesicState]:
    """Integrate the full geodesic equation from momentum ``L0``.

    Returns the states at ``t = 0`` and every ``record_every`` steps (the final
    step is always included). Raises :class:`GeodesicInstabilityError` if the
    relative drift of ``metric_inner(H, H)`` exceeds ``max_drift``.
    """
    if not t_f > 0:
        raise ValidationError(f"t_f must be positive, got {t_f}")
    if steps is None:
        steps = max(1, math.ceil(DEFAULT_STEPS_PER_UNIT_TIME * t_f))
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    n = L0.n
    inv = 1.0 / g_scale(n, w)
    diag = metric_diagonal(n, w)
    dim = 3**n
    h = t_f / steps

    def f(l, U):
        dl, H = _rhs_with_h(l, n, inv)
        return dl, -1j * H @ U

    l = L0.to_array()
    U = np.eye(dim, dtype=complex)
    e0 = _energy(l, inv, diag)
    states = [_state(0.0, l, inv, U, n)]
    for k in range(1, steps + 1):
        k1l, k1U = f(l, U)
        k2l, k2U = f(l + 0.5 * h * k1l, U + 0.5 * h * k1U)
        k3l, k3U = f(l + 0.5 * h * k2l, U + 0.5 * h * k2U)
        k4l, k4U = f(l + h * k3l, U + h * k3U)
        l = l + (h / 6) * (k1l + 2 * k2l + 2 * k3l + k4l)
        U = U + (h / 6) * (k1U + 2 * k2U + 2 * k3U + k4U)
        drift = abs(_energy(l, inv, diag) - e0) / max(e0, 1e-300)
        if e0 > 0 and drift > max_drift:
            raise GeodesicInstabilityError(
                f"energy drift {drift:.3e} at t={k * h:.6g} exceeds {max_drift:g}; increase steps (now {steps})",
                drift,
            )
        if k % record_every == 0 or k == steps:
            states.append(_state(k * h, l, inv, U, n))
    return states


def _state(t, l, inv, U, n):
    return GeodesicState(
        t=t,
        L=CoefficientVector.from_array(n, l),
        H=CoefficientVector.from_array(n, l * inv),
        U=U.copy(),
    )


@dataclass(frozen=True)
class STQInitialData:
    """Initial one-, two- and three-body momenta of a three-qutrit geodesic."""

    S0: np.ndarray
    T0: np.ndarray
    Q0: np.ndarray
    weights: PenaltyWeights

    def __post_init__(self):
        for name, body in (("S0", 1), ("T0", 2), ("Q0", 3)):
            M = np.asarray(getattr(self, name), dtype=complex)
            if M.shape != (27, 27):
                raise DimensionError(f"{name} must be a 27x27 three-qutrit operator, got {M.shape}")
            herm = float(np.max(np.abs(M - M.conj().T)))
            if herm > 1e-12 * max(1.0, float(np.max(np.abs(M)))):
                raise ValidationError(f"{name} is not Hermitian (defect {herm:.3e})", herm)
            coeffs = encode_array(M, 3)
            off = np.linalg.norm(coeffs[label_weights(3) != body])
            if off > 1e-10 * max(1.0, np.linalg.norm(coeffs)):
                raise ValidationError(f"{name} is not purely {body}-body (off-class norm {off:.3e})", off)
            if abs(np.trace(M)) > 1e-10 * max(1.0, float(np.max(np.abs(M)))):
                raise ValidationError(f"{name} is not traceless", abs(np.trace(M)))
            object.__setattr__(self, name, M)

    @classmethod
    def from_coefficients(cls, S, T, Q, weights):
        return cls(decode(S), decode(T), decode(Q), weights)

    @property
    def p(self):
        return self.weights.p

    @property
    def s(self):
        return self.weights.s


def _analytic_frames(d: STQInitialData, t: float):
    p, s = d.p, d.s
    outer = hermitian_expm(d.S0, -(1 / p - 1 / s) * t)  # exp(i t (1/p - 1/s) S0)
    inner = hermitian_expm(d.S0 + d.Q0, -(1 - 1 / p) * t)  # exp(i t (1 - 1/p)(S0 + Q0))
    return outer, outer @ inner


def analytic_STQ_solution(d: STQInitialData, t: float):
    """Closed-form ``(S(t), T(t), Q(t))`` of the reduced three-qutrit system."""
    outer, V = _analytic_frames(d, t)
    T = V @ d.T0 @ V.conj().T
    Q = outer @ d.Q0 @ outer.conj().T
    return d.S0.copy(), T, Q


def analytic_trajectory_rows(d: STQInitialData, times):
    """Trajectory rows from the closed form.

    The closed form carries no propagator for ``U``, so the last column is the
    unitarity defect of the frame rotating ``T0`` into ``T(t)``.
    """
    from qg3.metric import cost_F

    w = d.weights
    rows = []
    for t in times:
        outer, V = _analytic_frames(d, t)
        T = V @ d.T0 @ V.conj().T
        Q = outer @ d.Q0 @ outer.conj().T
        H = d.S0 / w.s + T + Q / w.p
        F = cost_F(CoefficientVector.from_array(3, encode_array(H, 3), atol=1e-13), w)
        rows.append((t, F, spectral_norm(d.S0), spectral_norm(T), spectral_norm(Q), unitarity_defect(V)))
    return rows


def stq_residual(d: STQInitialData, S, T, Q, dS, dT, dQ):
    """Max-entry residual of the reduced S/T/Q system for given values and derivatives."""
    p, s = d.p, d.s
    A = (1 - 1 / s) * S + (1 - 1 / p) * Q
    rT = dT - 1j * (A @ T - T @ A)
    rQ = dQ - 1j * (1 / p - 1 / s) * (S @ Q - Q @ S)
    return float(max(np.max(np.abs(dS)), np.max(np.abs(rT)), np.max(np.abs(rQ))))


@dataclass(frozen=True)
class STQState:
    t: float
    S: np.ndarray
    T: np.ndarray
    Q: np.ndarray
    U: np.ndarray

    def hamiltonian(self, w: PenaltyWeights):
        return self.S / w.s + self.T + self.Q / w.p


def integrate_stq(d: STQInitialData, t_f: float, steps: int | None = None, record_every: int = 1):
    """Fourth-order Runge-Kutta integration of the reduced S/T/Q system.

    Also accumulates ``U`` under ``H = S/s + T + Q/p``.
    """
    if not t_f > 0:
        raise ValidationError(f"t_f must be positive, got {t_f}")
    if steps is None:
        steps = max(1, math.ceil(DEFAULT_STEPS_PER_UNIT_TIME * t_f))
    p, s = d.p, d.s
    a, b, c = 1 - 1 / s, 1 - 1 / p, 1 / p - 1 / s
    S = d.S0
    h = t_f / steps

    def f(T, Q, U):
        A = a * S + b * Q
        H = S / s + T + Q / p
        return 1j * (A @ T - T @ A), 1j * c * (S @ Q - Q @ S), -1j * H @ U

    T, Q, U = d.T0.copy(), d.Q0.copy(), np.eye(27, dtype=complex)
    out = [STQState(0.0, S.copy(), T.copy(), Q.copy(), U.copy())]
    for k in range(1, steps + 1):
        k1 = f(T, Q, U)
        k2 = f(T + 0.5 * h * k1[0], Q + 0.5 * h * k1[1], U + 0.5 * h * k1[2])
        k3 = f(T + 0.5 * h * k2[0], Q + 0.5 * h * k2[1], U + 0.5 * h * k2[2])
        k4 = f(T + h * k3[0], Q + h * k3[1], U + h * k3[2])
        T = T + (h / 6) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        Q = Q + (h / 6) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        U = U + (h / 6) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if k % record_every == 0 or k == steps:
            out.append(STQState(k * h, S.copy(), T.copy(), Q.copy(), U.copy()))
    return out


def approx_hamiltonian(d: STQInitialData, t: float) -> np.ndarray:
    """Large-``p`` approximation of the three-qutrit Hamiltonian at time ``t``."""
    s = d.s
    A = hermitian_expm(d.S0, t / s)  # exp(-i t S0 / s)
    B = hermitian_expm(d.S0 + d.Q0, -t)  # exp(i t (S0 + Q0))
    X = A @ B
    return d.S0 / s + X @ d.T0 @ X.conj().T


def approx_unitary(d: STQInitialData, t: float) -> np.ndarray:
    """``exp(-i t S0/s) exp(i t (S0+Q0)) exp(-i t (S0+T0+Q0))``."""
    s = d.s
    return (
        hermitian_expm(d.S0, t / s)
        @ hermitian_expm(d.S0 + d.Q0, -t)
        @ hermitian_expm(d.S0 + d.T0 + d.Q0, t)
    )


def diagonal_restriction(T0, A, gap_tol: float = DEGENERACY_TOL):
    """Keep only the diagonal of ``T0`` in the eigenbasis of ``A``.

    Raises :class:`DegenerateSpectrumError` when two eigenvalues of ``A`` are
    closer than ``gap_tol``.
    """
    evals, V = np.linalg.eigh(A)
    gaps = np.diff(evals)
    gap = float(np.min(gaps)) if len(gaps) else math.inf
    if gap < gap_tol:
        i = int(np.argmin(gaps))
        raise DegenerateSpectrumError(
            f"S0+Q0 is degenerate: eigenvalues {i} and {i + 1} differ by {gap:.3e} < {gap_tol:g}",
            gap,
        )
    diag = np.real(np.einsum("ji,jk,ki->i", V.conj(), T0, V))
    return (V * diag) @ V.conj().T


def perturbative_unitary(d: STQInitialData, t: float, gap_tol: float = DEGENERACY_TOL) -> np.ndarray:
    """``exp(-i t S0/s) exp(-i t R(T0))`` with ``R`` the diagonal restriction in the S0+Q0 eigenbasis."""
    R = diagonal_restriction(d.T0, d.S0 + d.Q0, gap_tol)
    return hermitian_expm(d.S0, t / d.s) @ hermitian_expm(R, t)


def evolve_schedule(sch: Schedule) -> np.ndarray:
    """Time-ordered product of segment exponentials (later segments on the left)."""
    U = np.eye(3**sch.n, dtype=complex)
    for dt, c in sch.segments:
        if len(c):
            U = hermitian_expm(decode(c), dt) @ U
    return U


TRAJECTORY_COLUMNS = ("t", "F_H", "norm_S", "norm_T", "norm_Q", "unitarity_defect")


def _class_norms(l, n):
    wt = label_weights(n)
    out = []
    for body in (1, 2, 3):
        part = np.where(wt == body, l, 0.0)
        out.append(spectral_norm(decode_array(part, n)) if np.any(part) else 0.0)
    return out


def trajectory_rows(states, w: PenaltyWeights):
    """Rows ``(t, F(H), ||S||, ||T||, ||Q||, unitarity defect)`` for geodesic or S/T/Q states."""
    from qg3.metric import cost_F

    rows = []
    for st in states:
        if isinstance(st, GeodesicState):
            n = st.L.n
            l = st.L.to_array()
            F = cost_F(st.H, w)
            nS, nT, nQ = _class_norms(l, n)
        else:
            H = st.hamiltonian(w)
            F = cost_F(CoefficientVector.from_array(3, encode_array(H, 3), atol=1e-13), w)
            nS, nT, nQ = spectral_norm(st.S), spectral_norm(st.T), spectral_norm(st.Q)
        rows.append((st.t, F, nS, nT, nQ, unitarity_defect(st.U)))
    return rows


def write_trajectory_csv(path_or_file, rows, header_lines=()):
    """CSV with '.' decimals and repr-exact floats; ``header_lines`` become '#' comments."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(TRAJECTORY_COLUMNS)
        for row in rows:
            wr.writerow([repr(float(x)) for x in row])
    finally:
        if own:
            fh.close()
