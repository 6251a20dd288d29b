"""Dense complex matrix kernel: norms, Hermitian exponentials, unitarity checks."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from qg3.errors import DimensionError, ValidationError

HERMITIAN_TOL = 1e-10


def _square(M, what="operator"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be a square matrix, got shape {M.shape}")
    return M


def hermiticity_defect(M) -> float:
    M = _square(M)
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


def unitarity_defect(U) -> float:
    """max-entry norm of ``U^dagger U - I``."""
    U = _square(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0))


def spectral_norm(M) -> float:
    """Operator norm ``max_{|x|=1} |Mx|``, i.e. the largest singular value."""
    M = _square(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _hermitian_part_top(M, theta):
    R = np.exp(1j * theta) * M
    return np.linalg.eigvalsh(0.5 * (R + R.conj().T))[-1]


def expectation_norm(M, samples: int = 64, xtol: float = 1e-10) -> float:
    """Numerical-range radius ``max_{|psi|=1} |<psi|M|psi>|``.

    Uses ``w(M) = max_theta lambda_max(Re(e^{i theta} M))``: a coarse scan over
    ``samples`` angles, then bounded scalar refinement around the best one.
    Unlike :func:`spectral_norm` this is not unitarily invariant.
    """
    M = np.asarray(_square(M), dtype=complex)
    if M.size == 0:
        return 0.0
    grid = 2 * np.pi * np.arange(samples) / samples
    vals = np.array([_hermitian_part_top(M, th) for th in grid])
    best = int(np.argmax(vals))
    h = 2 * np.pi / samples
    res = minimize_scalar(
        lambda th: -_hermitian_part_top(M, th),
        bounds=(grid[best] - h, grid[best] + h),
        method="bounded",
        options={"xatol": xtol},
    )
    return float(max(vals[best], -res.fun, 0.0))


def check_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(_square(H, "Hamiltonian"), dtype=complex)
    defect = hermiticity_defect(H)
    if defect > tol:
        raise ValidationError(f"Hamiltonian is not Hermitian (max |H - H^dagger| = {defect:.3e})", defect)
    return H


def hermitian_expm(H, t: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via eigendecomposition.

    Returns the identity exactly when ``t == 0`` or ``H == 0``.
    """
    H = check_hermitian(H, tol)
    dim = H.shape[0]
    if t == 0 or not np.any(H):
        return np.eye(dim, dtype=complex)
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (V * np.exp(-1j * t * w)) @ V.conj().T


class PowerGap(NamedTuple):
    lhs: float
    rhs: float

    @property
    def holds(self):
        return self.lhs <= self.rhs + 1e-10


def unitary_power_gap(A, B, N: int) -> PowerGap:
    """``(||A^N - B^N||, N ||A - B||)`` for unitaries A, B."""
    A = _square(A)
    B = _square(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    AN = np.linalg.matrix_power(A, N)
    BN = np.linalg.matrix_power(B, N)
    return PowerGap(spectral_norm(AN - BN), N * spectral_norm(A - B))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a complex Ginibre matrix with phase fix)."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, traceless: bool = True) -> np.ndarray:
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = 0.5 * (Z + Z.conj().T)
    if traceless:
        H -= np.trace(H) / dim * np.eye(dim)
    return H


def operator_to_json(M) -> dict:
    M = np.asarray(_square(M), dtype=complex)
    return {"dim": M.shape[0], "re": M.real.tolist(), "im": M.imag.tolist()}


def operator_from_json(obj) -> np.ndarray:
    M = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if M.shape != (obj["dim"], obj["dim"]):
        raise DimensionError(f"declared dim {obj['dim']} does not match entries of shape {M.shape}")
    return M
