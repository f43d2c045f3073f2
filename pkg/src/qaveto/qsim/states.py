"""Dense pure states, density operators and named unitaries for small registers.

Qubit 0 is the most significant bit of a basis label, so ``|q0 q1 ... q(n-1)>``
maps to index ``sum(q_i * 2**(n-1-i))``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import RegisterSizeError, QSimError

ALGEBRA_TOL = 1e-10
OVERLAP_TOL = 1e-9
MAX_QUBITS = 12

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

PAULI = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
_PHASES = {"": 1, "+": 1, "-": -1, "i": 1j, "+i": 1j, "-i": -1j}


def _check_size(num_qubits: int) -> None:
    if num_qubits < 1:
        raise RegisterSizeError(f"register needs at least one qubit, got {num_qubits}")
    if num_qubits > MAX_QUBITS:
        raise RegisterSizeError(
            f"{num_qubits} qubits exceeds the dense-simulation limit of {MAX_QUBITS}"
        )


def _num_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise QSimError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        _check_size(_num_qubits_for(amps.size))
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > ALGEBRA_TOL:
            raise QSimError(f"state is not normalized (norm^2 = {norm:.12g})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.amplitudes.size)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @classmethod
    def from_bitstring(cls, bits: str) -> "StateVector":
        if not bits or set(bits) - {"0", "1"}:
            raise QSimError(f"invalid bitstring {bits!r}")
        _check_size(len(bits))
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def inner(self, other: "StateVector") -> complex:
        """Return <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed state; validated Hermitian, unit trace and positive semidefinite."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise QSimError(f"density matrix must be square, got shape {rho.shape}")
        _check_size(_num_qubits_for(rho.shape[0]))
        if np.max(np.abs(rho - rho.conj().T)) > ALGEBRA_TOL:
            raise QSimError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > ALGEBRA_TOL:
            raise QSimError(f"density matrix trace is {tr:.12g}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -ALGEBRA_TOL:
            raise QSimError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.matrix.shape[0])

    def __repr__(self):
        return f"DensityOperator(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray
    label: str = field(default="U", compare=False)

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise QSimError(f"unitary must be square, got shape {u.shape}")
        _num_qubits_for(u.shape[0])
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > ALGEBRA_TOL:
            raise QSimError(f"{self.label} is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def arity(self) -> int:
        return _num_qubits_for(self.matrix.shape[0])

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.matrix @ other.matrix, f"{self.label}*{other.label}")

    def dagger(self) -> "Unitary":
        return Unitary(self.matrix.conj().T, f"{self.label}^dag")

    def power(self, k: int) -> "Unitary":
        return Unitary(np.linalg.matrix_power(self.matrix, k), f"{self.label}^{k}")

    def equals_up_to_phase(self, other: "Unitary", tol: float = ALGEBRA_TOL) -> bool:
        a, b = self.matrix, other.matrix
        if a.shape != b.shape:
            return False
        # |tr(A^dag B)| = dim exactly when B = e^{i theta} A for unitaries
        return abs(abs(np.trace(a.conj().T @ b)) - a.shape[0]) <= tol * a.shape[0]

    def is_identity_up_to_phase(self, tol: float = ALGEBRA_TOL) -> bool:
        return self.equals_up_to_phase(identity(self.arity), tol)

    def __repr__(self):
        return f"Unitary({self.label}, arity={self.arity})"


def identity(arity: int = 1) -> Unitary:
    return Unitary(np.eye(2**arity, dtype=complex), "I" * arity)


def hadamard() -> Unitary:
    return Unitary(_H, "H")


def cnot() -> Unitary:
    """Controlled-NOT with the first target as control."""
    m = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    return Unitary(m, "CNOT")


def phase_gate(t: int) -> Unitary:
    """sigma_z(t) = diag(1, exp(i*pi*2**-t)); t=0 is sigma_z itself."""
    if t < 0:
        raise QSimError(f"phase gate index must be non-negative, got {t}")
    phase = np.exp(1j * math.pi * 2.0**-t)
    if t == 0:
        phase = -1.0
    elif t == 1:
        phase = 1j
    return Unitary(np.diag([1.0, phase]).astype(complex), f"sz({t})")


def parse_pauli_symbol(symbol: str) -> np.ndarray:
    """Single-qubit operator for tokens like ``I``, ``X``, ``iY``, ``-Z``, ``iX``."""
    s = symbol.strip()
    if not s or s[-1] not in PAULI or s[:-1] not in _PHASES:
        raise QSimError(f"unknown Pauli symbol {symbol!r}")
    return _PHASES[s[:-1]] * PAULI[s[-1]]


def build_pauli_word(symbols: Sequence[str]) -> Unitary:
    """Tensor product of the listed operators, keeping the written phases."""
    if isinstance(symbols, str):
        symbols = symbols.split()
    if len(symbols) == 0:
        raise QSimError("a Pauli word needs at least one symbol")
    mats = [parse_pauli_symbol(s) for s in symbols]
    return Unitary(functools.reduce(np.kron, mats), "(x)".join(symbols))


def _ghz(n: int) -> StateVector:
    if n < 2:
        raise QSimError(f"GHZ state needs n >= 2, got {n}")
    _check_size(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector(amps)


def bell_basis() -> list[StateVector]:
    """Bell basis ordered phi+, psi+, psi-, phi-.

    With this ordering the dense-coding operations I, X, iY, Z on the second
    qubit of phi+ land on outcomes 0, 1, 2, 3.
    """
    s = 1 / math.sqrt(2)
    return [
        StateVector(np.array([s, 0, 0, s])),
        StateVector(np.array([0, s, s, 0])),
        StateVector(np.array([0, -s, s, 0])),
        StateVector(np.array([s, 0, 0, -s])),
    ]


def ghz_basis(n: int) -> list[StateVector]:
    """GHZ basis: index ``2*x + sign`` for (|0x> +/- |1 not-x>)/sqrt2, x on n-1 bits.

    Index 0 is the GHZ state and index 1 its phase-flipped partner.
    """
    _check_size(n)
    dim = 2**n
    out = []
    s = 1 / math.sqrt(2)
    for x in range(dim // 2):
        for sign in (1, -1):
            amps = np.zeros(dim, dtype=complex)
            amps[x] = s
            amps[dim - 1 - x] = sign * s
            out.append(StateVector(amps))
    return out


def prepare_state(kind: str, n: int | None = None, bits: str | None = None) -> StateVector:
    """Named resource state: ``ghz`` (needs n >= 2), ``bell``, ``cluster4`` or
    ``computational`` (needs bits). ``plus``/``minus`` give single-qubit |+>/|->.

    >>> prepare_state("ghz", 3).amplitudes.round(4)[[0, 7]]
    array([0.7071+0.j, 0.7071+0.j])
    """
    if kind == "ghz":
        if n is None:
            raise QSimError("ghz requires n")
        return _ghz(n)
    if kind == "bell":
        return bell_basis()[0]
    if kind == "cluster4":
        amps = np.zeros(16, dtype=complex)
        amps[[0b0000, 0b0011, 0b1100]] = 0.5
        amps[0b1111] = -0.5
        return StateVector(amps)
    if kind == "computational":
        if bits is None:
            raise QSimError("computational state requires a bitstring")
        return StateVector.from_bitstring(bits)
    if kind == "plus":
        return StateVector(np.array([1, 1]) / math.sqrt(2))
    if kind == "minus":
        return StateVector(np.array([1, -1]) / math.sqrt(2))
    raise QSimError(f"unknown state kind {kind!r}")


def bb84_state(label: str) -> StateVector:
    """One of the four conjugate-coding states ``0``, ``1``, ``+``, ``-``."""
    if label in ("0", "1"):
        return StateVector.from_bitstring(label)
    if label == "+":
        return prepare_state("plus")
    if label == "-":
        return prepare_state("minus")
    raise QSimError(f"unknown BB84 state {label!r}")


def _validate_targets(n: int, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise QSimError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise QSimError(f"qubit index {t} out of range for {n}-qubit register")
    return targets


def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a (not necessarily unitary) operator to ``targets``; raw arrays in and out."""
    n = _num_qubits_for(amplitudes.size)
    k = len(targets)
    psi = amplitudes.reshape((2,) * n)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the new target axes first; move them back into place
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(-1)


def apply_unitary(state: StateVector, u: Unitary, targets: Sequence[int]) -> StateVector:
    targets = _validate_targets(state.num_qubits, targets)
    if len(targets) != u.arity:
        raise QSimError(f"{u.label} acts on {u.arity} qubits but {len(targets)} targets given")
    return StateVector(apply_matrix(state.amplitudes, u.matrix, targets))


@dataclass(frozen=True)
class Overlap:
    kind: str  # "same", "orthogonal" or "partial"
    probability: float

    def __str__(self):
        if self.kind == "partial":
            return f"partial({self.probability:.6g})"
        return self.kind


def overlap_label(final: StateVector, reference: StateVector) -> Overlap:
    """Classify |<reference|final>|^2, ignoring global phase."""
    if final.num_qubits != reference.num_qubits:
        raise QSimError(
            f"register sizes differ: {final.num_qubits} vs {reference.num_qubits}"
        )
    p = abs(reference.inner(final)) ** 2
    if p >= 1 - OVERLAP_TOL:
        return Overlap("same", p)
    if p <= OVERLAP_TOL:
        return Overlap("orthogonal", p)
    return Overlap("partial", p)
