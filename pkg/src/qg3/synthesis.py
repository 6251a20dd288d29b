"""Schedule -> one/two-qutrit gate synthesis with an itemized error budget.

Pipeline: drop >=3-body terms, replace the projected Hamiltonian by its time
average on slices of width ``delta``, then factor each slice's mean evolution
into single-term exponentials on ``ceil(1/delta)`` sub-steps.

The budget bounds ``||U - U_A||`` by

    3^n d / p                                   (projection)
  + sum_j 2 (exp(c w_j) - 1 - c w_j)            (mean Hamiltonian, c = 4 sqrt(2) n)
  + sum_j ||exp(-i Hbar_j w_j) - U_A^j||        (product formula, measured)

where the slice errors add up because ``||prod A_j - prod B_j|| <= sum ||A_j - B_j||``
for unitaries.
"""

from __future__ import annotations

import hashlib
import io
import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from qg3.errors import DimensionError, ValidationError
from qg3.geodesic import evolve_schedule
from qg3.linalg import hermitian_expm, spectral_norm
from qg3.metric import PenaltyWeights, Schedule, cost_F, path_length
from qg3.tensor_basis import (
    LAMBDA8_UNIT_SCALE,
    MAX_DENSE_SITES,
    BasisLabel,
    CoefficientVector,
    basis_size,
    build_operator,
    decode,
)

FORMAT_VERSION = "qg3-v1"
NORMALIZATION_TOL = 1e-9
# relative slack when deciding whether delta divides the duration
DIVIDE_TOL = 1e-9


@dataclass(frozen=True)
class Gate:
    label: BasisLabel
    angle: float

    def to_json(self, unit_norm=False):
        angle = self.angle
        if unit_norm:
            angle /= LAMBDA8_UNIT_SCALE ** self.label.gm.count(8)
        return {"sites": list(self.label.sites), "gm": list(self.label.gm), "angle": angle}


@lru_cache(maxsize=8192)
def _label_eig(label: BasisLabel):
    w, V = np.linalg.eigh(build_operator(label))
    return w, V


def gate_unitary(label: BasisLabel, angle: float) -> np.ndarray:
    """``exp(-i angle Lambda_label)``."""
    w, V = _label_eig(label)
    return (V * np.exp(-1j * angle * w)) @ V.conj().T


@dataclass(frozen=True)
class GateSequence:
    """Ordered factors ``exp(-i angle Lambda)``; the first gate acts first."""

    n: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if g.label.weight > 2:
                raise ValidationError(f"gate {g.label} acts on more than two qutrits")
            if g.label.n != self.n:
                raise DimensionError(f"gate {g.label} has n={g.label.n}, sequence has n={self.n}")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other):
        if other.n != self.n:
            raise DimensionError("cannot concatenate sequences on different site counts")
        return GateSequence(self.n, self.gates + other.gates)

    def realize(self) -> np.ndarray:
        U = np.eye(3**self.n, dtype=complex)
        for g in self.gates:
            U = gate_unitary(g.label, g.angle) @ U
        return U

    def to_json(self, unit_norm=False):
        """``unit_norm=True`` rescales angles to the generator with ``lambda_8 -> (sqrt(3)/2) lambda_8``."""
        out = {"n": self.n, "gates": [g.to_json(unit_norm) for g in self.gates]}
        if unit_norm:
            out["generator_convention"] = "unit_operator_norm"
        return out

    @classmethod
    def from_json(cls, obj):
        scale = obj.get("generator_convention") == "unit_operator_norm"
        gates = []
        for g in obj["gates"]:
            lab = BasisLabel(obj["n"], tuple(g["sites"]), tuple(g["gm"]))
            angle = g["angle"] * (LAMBDA8_UNIT_SCALE ** lab.gm.count(8) if scale else 1.0)
            gates.append(Gate(lab, angle))
        return cls(obj["n"], tuple(gates))


def project_12body(sch: Schedule) -> Schedule:
    """Drop every term of body weight >= 3."""
    return sch.map(lambda c: c.restrict(max_body=2))


def projection_bound(d: float, n: int, p: float) -> float:
    if d < 0 or p <= 0:
        raise ValidationError(f"need d >= 0 and p > 0, got d={d}, p={p}")
    return 3**n * d / p


def mean_bound(c: float, delta: float) -> float:
    """``2 (exp(c delta) - 1 - c delta)``."""
    if c < 0 or delta < 0:
        raise ValidationError(f"need c >= 0 and delta >= 0, got c={c}, delta={delta}")
    x = c * delta
    if x < 1e-3:
        # series avoids cancellation in expm1(x) - x
        return 2 * x * x * (0.5 + x * (1 / 6 + x * (1 / 24 + x * (1 / 120 + x / 720))))
    return 2 * (math.expm1(x) - x)


def norm_cap_12body(n: int) -> float:
    """Cap ``4 sqrt(2) n`` on ``||H_P||`` for unit-cost schedules (sqrt of 32 n^2 bounds sqrt(L))."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return 4 * math.sqrt(2) * n


def _slice_count(total, delta):
    q = total / delta
    r = round(q)
    if r >= 1 and abs(q - r) <= DIVIDE_TOL * max(1.0, q):
        return r
    return math.ceil(q)


def slice_schedule(sch: Schedule, delta: float) -> list[Schedule]:
    """Cut a schedule into consecutive pieces of duration ``delta``.

    The last piece is shorter when ``delta`` does not divide the duration.
    """
    if not len(sch):
        raise ValidationError("cannot slice an empty schedule")
    if not delta > 0:
        raise ValidationError(f"slice width must be positive, got {delta}")
    total = sch.total_duration
    count = _slice_count(total, delta)
    bounds = [j * delta for j in range(count)] + [total]
    starts = np.concatenate([[0.0], np.cumsum([dt for dt, _ in sch.segments])])
    starts[-1] = total
    pieces = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        segs = []
        for (dt, c), t0, t1 in zip(sch.segments, starts[:-1], starts[1:]):
            overlap = min(t1, b) - max(t0, a)
            if overlap > 1e-15 * max(1.0, total):
                segs.append((overlap, c))
        pieces.append(Schedule(sch.n, tuple(segs)))
    return pieces


def time_average(sch: Schedule) -> CoefficientVector:
    """Duration-weighted mean of the segment coefficient vectors."""
    total = sch.total_duration
    acc = {}
    for dt, c in sch.segments:
        for lab, h in c.terms.items():
            acc[lab] = acc.get(lab, 0.0) + dt * h
    return CoefficientVector(sch.n, {lab: v / total for lab, v in acc.items()})


def slice_and_average(sch: Schedule, delta: float) -> list[CoefficientVector]:
    return [time_average(piece) for piece in slice_schedule(sch, delta)]


def inner_steps(delta: float) -> int:
    """Number of product-formula sub-steps per slice: ``ceil(1/delta)``."""
    return max(1, math.ceil(1.0 / delta - DIVIDE_TOL))


def trotter_slice(mean: CoefficientVector, delta: float, steps: int | None = None) -> GateSequence:
    """First-order product formula for ``exp(-i mean * delta)``.

    ``[0, delta]`` is split into ``steps`` sub-intervals (default
    ``ceil(1/delta)``, so each has width about ``delta**2``); every
    sub-interval emits one gate per term in canonical label order.
    """
    if mean.max_body > 2:
        raise ValidationError("slice mean contains >=3-body terms; project the schedule first")
    if not delta > 0:
        raise ValidationError(f"slice width must be positive, got {delta}")
    steps = inner_steps(delta) if steps is None else steps
    width = delta / steps
    sub = tuple(Gate(lab, h * width) for lab, h in mean.items())
    return GateSequence(mean.n, sub * steps)


def _slice_realization(mean: CoefficientVector, delta: float, steps: int) -> np.ndarray:
    width = delta / steps
    U = np.eye(3**mean.n, dtype=complex)
    for lab, h in mean.items():
        U = gate_unitary(lab, h * width) @ U
    return np.linalg.matrix_power(U, steps)


@dataclass(frozen=True)
class SliceDiagnostics:
    index: int
    width: float
    steps: int
    gates: int
    norm_cap: float
    max_hp_norm: float
    mean_bound: float
    mean_error: float
    trotter_defect: float

    def to_json(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class ErrorBudget:
    n: int
    p: float
    delta: float
    slices: int
    norm_cap: float
    path_length: float
    projection_bound: float
    mean_bound_total: float
    trotter_bound_total: float
    measured_error: float
    measured_projection_error: float
    measured_slice_error_sum: float
    measured_pa_error: float
    gate_count: int
    c1_measured: float
    c2_fit: float
    hypotheses_hold: bool

    @property
    def a_priori_total(self) -> float:
        return self.projection_bound + self.mean_bound_total + self.trotter_bound_total

    @property
    def sound(self) -> bool:
        return self.measured_error <= self.a_priori_total + 1e-8

    def to_json(self):
        return {
            "parameters": {
                "n": self.n,
                "p": self.p,
                "delta": self.delta,
                "slices": self.slices,
                "c": self.norm_cap,
                "d": self.path_length,
            },
            "terms": {
                "projection": {"origin": "lemma3", "bound": self.projection_bound,
                               "measured": self.measured_projection_error},
                "mean_hamiltonian": {"origin": "lemma4", "bound": self.mean_bound_total},
                "trotter": {"origin": "lemma5", "bound": self.trotter_bound_total},
                "telescoping": {"origin": "prop1", "sum_slice_errors": self.measured_slice_error_sum,
                                "product_error": self.measured_pa_error},
            },
            "a_priori_total": self.a_priori_total,
            "measured_error": self.measured_error,
            "gate_count": self.gate_count,
            "c1_measured": self.c1_measured,
            "c2_fit": self.c2_fit,
            "hypotheses_hold": self.hypotheses_hold,
            "sound": self.sound,
        }

    @classmethod
    def from_json(cls, obj):
        par, terms = obj["parameters"], obj["terms"]
        return cls(
            n=par["n"], p=par["p"], delta=par["delta"], slices=par["slices"], norm_cap=par["c"],
            path_length=par["d"],
            projection_bound=terms["projection"]["bound"],
            mean_bound_total=terms["mean_hamiltonian"]["bound"],
            trotter_bound_total=terms["trotter"]["bound"],
            measured_error=obj["measured_error"],
            measured_projection_error=terms["projection"]["measured"],
            measured_slice_error_sum=terms["telescoping"]["sum_slice_errors"],
            measured_pa_error=terms["telescoping"]["product_error"],
            gate_count=obj["gate_count"], c1_measured=obj["c1_measured"], c2_fit=obj["c2_fit"],
            hypotheses_hold=obj["hypotheses_hold"],
        )


def schedule_digest(sch: Schedule) -> str:
    blob = json.dumps(sch.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SynthesisReport:
    input_digest: str
    config: dict
    gates: GateSequence
    budget: ErrorBudget
    slices: tuple = field(default=())
    version: str = FORMAT_VERSION

    def to_json(self):
        return {
            "version": self.version,
            "config": self.config,
            "input_digest": self.input_digest,
            "budget": self.budget.to_json(),
            "slices": [s.to_json() for s in self.slices],
            "gates": self.gates.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, obj):
        return cls(
            input_digest=obj["input_digest"],
            config=obj["config"],
            gates=GateSequence.from_json(obj["gates"]),
            budget=ErrorBudget.from_json(obj["budget"]),
            slices=tuple(SliceDiagnostics(**s) for s in obj["slices"]),
            version=obj["version"],
        )

    def slices_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["slice", "c", "delta", "mean_bound", "trotter_defect"])
        for s in self.slices:
            wr.writerow([s.index, repr(s.norm_cap), repr(s.width), repr(s.mean_bound), repr(s.trotter_defect)])
        return buf.getvalue()

    def summary(self) -> str:
        b = self.budget
        return f"gates={b.gate_count} a_priori_total={b.a_priori_total:.6g} measured_error={b.measured_error:.6g}"


def check_normalized(sch: Schedule, w: PenaltyWeights, tol: float = NORMALIZATION_TOL):
    for i, (_, c) in enumerate(sch.segments):
        f = cost_F(c, w)
        if f > 1 + tol:
            raise ValidationError(f"segment {i} is not normalized: F(H) = {f:.12g} > 1", f - 1)


def synthesize(sch: Schedule, w: PenaltyWeights, delta: float, keep_gates: bool = True) -> SynthesisReport:
    """Compile a unit-cost schedule into one/two-qutrit gates and certify the error.

    ``measured_error`` is ``||U - U_A||`` against the exact time-ordered
    evolution of the input schedule.
    """
    n = sch.n
    if n > MAX_DENSE_SITES:
        raise DimensionError(f"synthesis needs dense {3**n}-dim matrices; limited to n <= {MAX_DENSE_SITES}")
    if not delta > 0:
        raise ValidationError(f"slice width must be positive, got {delta}")
    check_normalized(sch, w)
    total = sch.total_duration
    if delta > total * (1 + DIVIDE_TOL):
        raise ValidationError(f"slice width {delta} exceeds total duration {total}")

    d = path_length(sch, w)
    cap = norm_cap_12body(n)
    projected = project_12body(sch)
    U = evolve_schedule(sch)
    U_P = evolve_schedule(projected)

    steps_nominal = inner_steps(delta)
    sub_width = delta / steps_nominal
    U_A = np.eye(3**n, dtype=complex)
    gate_list = []
    diags = []
    slice_err_sum = 0.0
    for j, piece in enumerate(slice_schedule(projected, delta)):
        width = piece.total_duration
        steps = steps_nominal if abs(width - delta) <= DIVIDE_TOL * delta else max(1, math.ceil(width / sub_width - DIVIDE_TOL))
        mean = time_average(piece)
        U_Pj = evolve_schedule(piece)
        U_Mj = hermitian_expm(decode(mean), width)
        U_Aj = _slice_realization(mean, width, steps)
        if keep_gates:
            gate_list.extend(trotter_slice(mean, width, steps).gates)
        hp = max((spectral_norm(decode(c)) for _, c in piece.segments), default=0.0)
        diags.append(
            SliceDiagnostics(
                index=j,
                width=width,
                steps=steps,
                gates=len(mean) * steps,
                norm_cap=cap,
                max_hp_norm=hp,
                mean_bound=mean_bound(cap, width),
                mean_error=spectral_norm(U_Pj - U_Mj),
                trotter_defect=spectral_norm(U_Mj - U_Aj),
            )
        )
        slice_err_sum += spectral_norm(U_Pj - U_Aj)
        U_A = U_Aj @ U_A

    gate_count = sum(s.gates for s in diags)
    budget = ErrorBudget(
        n=n,
        p=w.p,
        delta=delta,
        slices=len(diags),
        norm_cap=cap,
        path_length=d,
        projection_bound=projection_bound(d, n, w.p),
        mean_bound_total=math.fsum(s.mean_bound for s in diags),
        trotter_bound_total=math.fsum(s.trotter_defect for s in diags),
        measured_error=spectral_norm(U - U_A),
        measured_projection_error=spectral_norm(U - U_P),
        measured_slice_error_sum=slice_err_sum,
        measured_pa_error=spectral_norm(U_P - U_A),
        gate_count=gate_count,
        c1_measured=max(s.gates for s in diags) * delta / n**2,
        c2_fit=max(s.trotter_defect / (n**2 * s.width**3) for s in diags),
        hypotheses_hold=all(s.max_hp_norm <= cap for s in diags),
    )
    config = {"n": n, "p": w.p, "s": w.s, "delta": delta}
    return SynthesisReport(
        input_digest=schedule_digest(sch),
        config=config,
        gates=GateSequence(n, gate_list),
        budget=budget,
        slices=tuple(diags),
    )


def structural_c1(n: int) -> float:
    """Gates per slice times ``delta / n^2`` when every one/two-body term is present."""
    return basis_size(n, 2) / n**2


def gate_count_estimate(d: float, n: int, k: int, c1: float | None = None) -> int:
    """``c1 d^3 n^(2k+2)``: total gates when ``1/delta = n^k d``."""
    if d <= 0 or n < 1 or k < 1:
        raise ValidationError(f"need d > 0, n >= 1, k >= 1; got d={d}, n={n}, k={k}")
    c1 = structural_c1(n) if c1 is None else c1
    return math.ceil(c1 * d**3 * n ** (2 * k + 2) - 1e-9)
