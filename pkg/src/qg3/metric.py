"""Penalty metric on coefficient space, curve length and piecewise-constant schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qg3.errors import DimensionError, ValidationError
from qg3.tensor_basis import CoefficientVector, label_norms2, label_weights


@dataclass(frozen=True)
class PenaltyWeights:
    """``p`` penalizes >=3-body directions; ``s`` weights one-body directions."""

    p: float
    s: float = 1.0

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValidationError(f"penalty p must be positive and finite, got {self.p}")
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValidationError(f"one-body weight s must be positive and finite, got {self.s}")

    @classmethod
    def default(cls, n: int, s: float = 1.0):
        return cls(p=float(9**n), s=s)


def cost_F(c: CoefficientVector, w: PenaltyWeights) -> float:
    """``sqrt(sum_{<=2 body} h^2 + p^2 sum_{>=3 body} h^2)``."""
    low = high = 0.0
    for lab, h in c.terms.items():
        if lab.weight <= 2:
            low += h * h
        else:
            high += h * h
    return math.sqrt(low + w.p**2 * high)


def metric_diagonal(n: int, w: PenaltyWeights) -> np.ndarray:
    """Diagonal metric components per canonical label: ``s`` / 1 / ``p**2``.

    With ``s = 1`` this is exactly the 1 / p^2 penalty metric, so that
    ``metric_inner(c, c, w) == cost_F(c, w)**2``.
    """
    wt = label_weights(n)
    return np.where(wt == 1, w.s, np.where(wt == 2, 1.0, w.p**2))


def metric_inner(a: CoefficientVector, b: CoefficientVector, w: PenaltyWeights) -> float:
    if a.n != b.n:
        raise DimensionError(f"site counts differ: {a.n} vs {b.n}")
    total = 0.0
    for lab, h in a.terms.items():
        hb = b[lab]
        if hb:
            g = w.s if lab.weight == 1 else (1.0 if lab.weight == 2 else w.p**2)
            total += g * h * hb
    return total


def g_scale(n: int, w: PenaltyWeights) -> np.ndarray:
    """Per-label factor of the operator G = s*S + T + p*Q (one/two/>=3-body)."""
    wt = label_weights(n)
    return np.where(wt == 1, w.s, np.where(wt == 2, 1.0, w.p))


def apply_G(c: CoefficientVector, w: PenaltyWeights) -> CoefficientVector:
    return CoefficientVector(
        c.n, {lab: h * (w.s if lab.weight == 1 else 1.0 if lab.weight == 2 else w.p) for lab, h in c.terms.items()}
    )


def apply_G_inverse(c: CoefficientVector, w: PenaltyWeights) -> CoefficientVector:
    return CoefficientVector(
        c.n, {lab: h / (w.s if lab.weight == 1 else 1.0 if lab.weight == 2 else w.p) for lab, h in c.terms.items()}
    )


def trace_form_inner(a: CoefficientVector, b: CoefficientVector, w: PenaltyWeights) -> float:
    """``tr(A G(B)) / (2 * 3**(n-1))`` evaluated in coefficient space.

    Because basis norms depend on body weight (``tr Lambda^2 = 2^s 3^(n-s)``),
    this differs from :func:`metric_inner` by a per-class factor
    ``(2/3)**(s-1)`` besides the ``p`` versus ``p**2`` weighting.
    """
    if a.n != b.n:
        raise DimensionError(f"site counts differ: {a.n} vs {b.n}")
    scale = g_scale(a.n, w) * label_norms2(a.n) / (2 * 3 ** (a.n - 1))
    return float(np.sum(a.to_array() * b.to_array() * scale))


@dataclass(frozen=True)
class BodySplit:
    """One-, two- and three-body parts of a three-qutrit coefficient vector."""

    S: CoefficientVector
    T: CoefficientVector
    Q: CoefficientVector

    def reassemble(self) -> CoefficientVector:
        return self.S + self.T + self.Q


def split_STQ(c: CoefficientVector) -> BodySplit:
    if c.n != 3:
        raise DimensionError(f"S/T/Q split is defined for three qutrits, got n={c.n}")
    return BodySplit(c.restrict(1, 1), c.restrict(2, 2), c.restrict(3, 3))


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant Hamiltonian: ordered ``(dt, coefficients)`` segments."""

    n: int
    segments: tuple

    def __post_init__(self):
        segs = tuple((float(dt), c) for dt, c in self.segments)
        for i, (dt, c) in enumerate(segs):
            if not dt > 0 or not math.isfinite(dt):
                raise ValidationError(f"segment {i}: duration must be positive, got {dt}")
            if c.n != self.n:
                raise DimensionError(f"segment {i}: coefficient vector has n={c.n}, schedule has n={self.n}")
        object.__setattr__(self, "segments", segs)

    @property
    def total_duration(self) -> float:
        return math.fsum(dt for dt, _ in self.segments)

    def __len__(self):
        return len(self.segments)

    def map(self, fn):
        """New schedule with every coefficient vector replaced by ``fn(c)``."""
        return Schedule(self.n, tuple((dt, fn(c)) for dt, c in self.segments))

    def to_json(self):
        return {
            "n": self.n,
            "segments": [{"dt": dt, "terms": c.to_json()["terms"]} for dt, c in self.segments],
        }

    @classmethod
    def from_json(cls, obj):
        n = obj["n"]
        return cls(
            n,
            tuple(
                (seg["dt"], CoefficientVector.from_json({"n": n, "terms": seg["terms"]}))
                for seg in obj["segments"]
            ),
        )


def path_length(sch: Schedule, w: PenaltyWeights) -> float:
    return math.fsum(dt * cost_F(c, w) for dt, c in sch.segments)


def normalize_schedule(sch: Schedule, w: PenaltyWeights) -> Schedule:
    """Rescale every segment to unit cost while keeping its unitary fixed.

    A segment ``(dt, H)`` becomes ``(dt * F(H), H / F(H))``.
    """
    segs = []
    for i, (dt, c) in enumerate(sch.segments):
        f = cost_F(c, w)
        if f <= 0.0:
            raise ValidationError(f"segment {i} has zero cost and cannot be normalized", f)
        if f == 1.0:
            segs.append((dt, c))
        else:
            segs.append((dt * f, c / f))
    return Schedule(sch.n, tuple(segs))
