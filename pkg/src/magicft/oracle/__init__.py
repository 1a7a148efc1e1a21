"""Brute-force ground truth: exact phase-polynomial algebra and state-vector simulation."""

from .crossval import CrossvalReport, SamplePolicy, crossvalidate
from .phasepoly import PhasePolyOperator, compose
from .relations import verify_relations
from .statevec import SimulationResult, StateVector, build_code_state, simulate_circuit

__all__ = [
    "CrossvalReport",
    "PhasePolyOperator",
    "SamplePolicy",
    "SimulationResult",
    "StateVector",
    "build_code_state",
    "compose",
    "crossvalidate",
    "simulate_circuit",
    "verify_relations",
]
