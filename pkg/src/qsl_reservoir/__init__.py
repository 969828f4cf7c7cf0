"""Quantum speed limit time for two qubits in independent or common Lorentzian reservoirs."""

from .common import CommonReservoirParams
from .independent import IndependentReservoirParams
from .qmath import InvariantViolation, fidelity, partial_trace, purity, tensor
from .qsl import QSLResult, evaluate_point, tau_qsl, x_tau
from .states import EWLParams, Family, ewl_state

__all__ = [
    "CommonReservoirParams",
    "EWLParams",
    "Family",
    "IndependentReservoirParams",
    "InvariantViolation",
    "QSLResult",
    "evaluate_point",
    "ewl_state",
    "fidelity",
    "partial_trace",
    "purity",
    "tau_qsl",
    "tensor",
    "x_tau",
]
