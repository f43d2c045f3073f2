"""Small-register state-vector and density-operator simulation."""

from .channels import (
    KrausChannel,
    apply_channel,
    conjugate,
    density_probabilities,
    embed,
    fidelity,
    make_channel,
    partial_trace,
    sample_kraus,
)
from .measure import MeasurementRecord, completed_basis, measure, outcome_probabilities
from .register import Qubit, Register, apply_to, fresh_qubit
from .states import (
    ALGEBRA_TOL,
    MAX_QUBITS,
    OVERLAP_TOL,
    DensityOperator,
    Overlap,
    StateVector,
    Unitary,
    apply_unitary,
    bb84_state,
    bell_basis,
    build_pauli_word,
    cnot,
    ghz_basis,
    hadamard,
    identity,
    overlap_label,
    phase_gate,
    prepare_state,
)

__all__ = [
    "ALGEBRA_TOL",
    "MAX_QUBITS",
    "OVERLAP_TOL",
    "DensityOperator",
    "KrausChannel",
    "MeasurementRecord",
    "Overlap",
    "Qubit",
    "Register",
    "StateVector",
    "Unitary",
    "apply_channel",
    "apply_to",
    "apply_unitary",
    "bb84_state",
    "bell_basis",
    "build_pauli_word",
    "cnot",
    "completed_basis",
    "conjugate",
    "density_probabilities",
    "embed",
    "fidelity",
    "fresh_qubit",
    "ghz_basis",
    "hadamard",
    "identity",
    "make_channel",
    "measure",
    "outcome_probabilities",
    "overlap_label",
    "partial_trace",
    "phase_gate",
    "prepare_state",
    "sample_kraus",
]
