"""Penalty-metric geometry and gate synthesis for n-qutrit circuits."""

from qg3.metric import PenaltyWeights, Schedule
from qg3.synthesis import FORMAT_VERSION, synthesize
from qg3.tensor_basis import BasisLabel, CoefficientVector, decode, encode, enumerate_basis

__version__ = "0.1.0"

__all__ = [
    "FORMAT_VERSION",
    "BasisLabel",
    "CoefficientVector",
    "PenaltyWeights",
    "Schedule",
    "decode",
    "encode",
    "enumerate_basis",
    "synthesize",
]
