"""Projective measurements in named or custom bases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import QSimError
from .states import (
    StateVector,
    _H,
    _validate_targets,
    bell_basis,
    ghz_basis,
)

BASES = ("computational", "diagonal", "bell", "ghz", "custom")


@dataclass(frozen=True)
class MeasurementRecord:
    basis: str
    targets: tuple[int, ...]
    outcome: int
    probability: float
    post_state: StateVector


def basis_matrix(basis: str, k: int, vectors: Sequence[StateVector] | None = None) -> np.ndarray:
    """Columns are the basis vectors on a ``k``-qubit target register.

    For product bases the outcome index reads the per-qubit results as a
    big-endian bitstring (``+`` is 0 and ``-`` is 1 in the diagonal basis).
    """
    if basis == "computational":
        return np.eye(2**k, dtype=complex)
    if basis == "diagonal":
        m = np.array([[1.0]], dtype=complex)
        for _ in range(k):
            m = np.kron(m, _H)
        return m
    if basis == "bell":
        if k != 2:
            raise QSimError("Bell measurement needs exactly two targets")
        return np.column_stack([v.amplitudes for v in bell_basis()])
    if basis == "ghz":
        return np.column_stack([v.amplitudes for v in ghz_basis(k)])
    if basis == "custom":
        if vectors is None:
            raise QSimError("custom basis requires vectors")
        m = np.column_stack([np.asarray(v.amplitudes if isinstance(v, StateVector) else v) for v in vectors])
        if m.shape != (2**k, 2**k):
            raise QSimError(f"custom basis must have {2**k} vectors of length {2**k}")
        if np.max(np.abs(m.conj().T @ m - np.eye(2**k))) > 1e-10:
            raise QSimError("custom basis is not orthonormal")
        return m
    raise QSimError(f"unknown basis {basis!r}")


def completed_basis(first: StateVector) -> list[StateVector]:
    """Orthonormal basis whose first element is ``first`` (up to phase it is exactly ``first``)."""
    dim = first.amplitudes.size
    seed = np.column_stack([first.amplitudes, np.eye(dim, dtype=complex)])
    q, _ = np.linalg.qr(seed)
    q = q[:, :dim]
    # QR may flip the phase of the first column; restore it
    q[:, 0] = first.amplitudes
    out = [first]
    for j in range(1, dim):
        out.append(StateVector.normalized(q[:, j]))
    return out


def _split(amplitudes: np.ndarray, n: int, targets: list[int]) -> tuple[np.ndarray, list[int]]:
    rest = [q for q in range(n) if q not in targets]
    psi = amplitudes.reshape((2,) * n).transpose(targets + rest)
    return psi.reshape(2 ** len(targets), -1), rest


def outcome_probabilities(
    state: StateVector, basis: str, targets: Sequence[int], vectors=None
) -> np.ndarray:
    targets = _validate_targets(state.num_qubits, targets)
    b = basis_matrix(basis, len(targets), vectors)
    m, _ = _split(state.amplitudes, state.num_qubits, targets)
    comps = b.conj().T @ m
    p = np.sum(np.abs(comps) ** 2, axis=1)
    return p / p.sum()


def measure(
    state: StateVector,
    basis: str,
    targets: Sequence[int],
    rng: np.random.Generator,
    vectors: Sequence[StateVector] | None = None,
) -> MeasurementRecord:
    """Sample an outcome by the Born rule and collapse ``targets`` onto it."""
    n = state.num_qubits
    targets = _validate_targets(n, targets)
    b = basis_matrix(basis, len(targets), vectors)
    m, rest = _split(state.amplitudes, n, targets)
    comps = b.conj().T @ m
    probs = np.sum(np.abs(comps) ** 2, axis=1)
    probs = probs / probs.sum()
    outcome = int(rng.choice(len(probs), p=probs))
    remainder = comps[outcome] / np.sqrt(probs[outcome])
    joint = np.outer(b[:, outcome], remainder).reshape((2,) * n)
    order = targets + rest
    post = joint.transpose(np.argsort(order)).reshape(-1)
    return MeasurementRecord(
        basis=basis,
        targets=tuple(targets),
        outcome=outcome,
        probability=float(probs[outcome]),
        post_state=StateVector.normalized(post),
    )
