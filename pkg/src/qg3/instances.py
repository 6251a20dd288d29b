"""Seeded random instance families used by tests, campaigns and the CLI.

Coefficients are independent standard normals per basis label; each family
then fixes a normalization (unit cost, unit class norm, or a spectral-norm cap).
"""

from __future__ import annotations

import numpy as np

from qg3.metric import PenaltyWeights, Schedule, cost_F
from qg3.tensor_basis import CoefficientVector, decode_array, label_weights


def rng_for(seed: int, trial: int = 0) -> np.random.Generator:
    """Per-trial generator derived as ``seed + trial``."""
    return np.random.default_rng(int(seed) + int(trial))


def random_class_vector(n: int, body: int, rng, norm: float = 1.0) -> CoefficientVector:
    """Gaussian coefficients on the labels of one body weight, scaled to Euclidean ``norm``."""
    wt = label_weights(n)
    arr = np.where(wt == body, rng.standard_normal(len(wt)), 0.0)
    nrm = np.linalg.norm(arr)
    if nrm == 0:
        return CoefficientVector(n)
    return CoefficientVector.from_array(n, arr * (norm / nrm))


def random_coefficients(n: int, rng, max_body: int | None = None, min_body: int = 1, density: float = 1.0):
    """Gaussian coefficients on labels with ``min_body <= weight <= max_body``.

    With ``density < 1`` each label is kept independently with that probability.
    """
    wt = label_weights(n)
    top = n if max_body is None else max_body
    arr = rng.standard_normal(len(wt))
    mask = (wt >= min_body) & (wt <= top)
    if density < 1.0:
        mask &= rng.random(len(wt)) < density
    return CoefficientVector.from_array(n, np.where(mask, arr, 0.0))


def random_unit_cost(n: int, rng, w: PenaltyWeights, max_body: int | None = None, **kw) -> CoefficientVector:
    c = random_coefficients(n, rng, max_body=max_body, **kw)
    while not len(c):
        c = random_coefficients(n, rng, max_body=max_body, **kw)
    return c / cost_F(c, w)


def random_durations(rng, segments: int, total: float) -> np.ndarray:
    d = rng.uniform(0.5, 1.5, size=segments)
    return d * (total / d.sum())


def random_schedule(
    n: int,
    rng,
    w: PenaltyWeights,
    segments: int = 5,
    total: float = 1.0,
    max_body: int | None = None,
    **kw,
) -> Schedule:
    """Unit-cost segments with random positive durations summing to ``total``.

    The path length under ``w`` therefore equals ``total``.
    """
    dts = random_durations(rng, segments, total)
    return Schedule(n, tuple((float(dt), random_unit_cost(n, rng, w, max_body=max_body, **kw)) for dt in dts))


def random_bounded_schedule(n: int, rng, c: float, width: float, segments: int = 4):
    """Piecewise-constant schedule on ``[0, width]`` with ``||H(t)|| == c`` on every segment.

    The segment shape is drawn on unit time and then stretched, so families
    generated from the same ``rng`` state differ only in ``width``.
    """
    fracs = random_durations(rng, segments, 1.0)
    coeffs = []
    for _ in range(segments):
        v = random_coefficients(n, rng)
        H = decode_array(v.to_array(), n)
        coeffs.append(v * (c / np.linalg.norm(H, 2)))
    return Schedule(n, tuple((float(f * width), v) for f, v in zip(fracs, coeffs)))


def random_stq(rng, w: PenaltyWeights, scales=(1.0, 1.0, 1.0)):
    """Three-qutrit S/T/Q data; each class has Euclidean coefficient norm ``scales[i]``."""
    from qg3.geodesic import STQInitialData

    parts = [random_class_vector(3, body, rng, norm=scale) for body, scale in zip((1, 2, 3), scales)]
    return STQInitialData.from_coefficients(*parts, w)
