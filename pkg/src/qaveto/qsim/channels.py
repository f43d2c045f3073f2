"""Single-qubit Kraus channels for travel noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ChannelError, QSimError
from .states import ALGEBRA_TOL, DensityOperator, StateVector, _validate_targets, apply_matrix

CHANNEL_KINDS = ("amplitude", "phase", "identity")


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    damping: float
    kind: str

    def __post_init__(self):
        ops = tuple(np.asarray(e, dtype=complex) for e in self.operators)
        if not ops or any(e.shape != (2, 2) for e in ops):
            raise ChannelError("Kraus operators must be a nonempty set of 2x2 matrices")
        if self.kind not in CHANNEL_KINDS:
            raise ChannelError(f"unknown channel kind {self.kind!r}")
        total = sum(e.conj().T @ e for e in ops)
        if np.max(np.abs(total - np.eye(2))) > ALGEBRA_TOL:
            raise ChannelError("Kraus operators violate completeness (sum E^dag E != I)")
        object.__setattr__(self, "operators", ops)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" or self.damping == 0.0

    def __repr__(self):
        return f"KrausChannel({self.kind}, eta={self.damping})"


def make_channel(kind: str, eta: float = 0.0) -> KrausChannel:
    """Amplitude or phase damping with parameter ``eta`` in [0, 1].

    Phase damping uses E1 = [[0, 0], [0, sqrt(eta)]] so that the map is trace
    preserving.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise ChannelError(f"damping parameter must lie in [0, 1], got {eta}")
    if kind == "identity":
        return KrausChannel((np.eye(2),), 0.0, "identity")
    e0 = np.array([[1, 0], [0, math.sqrt(1 - eta)]])
    if kind == "amplitude":
        e1 = np.array([[0, math.sqrt(eta)], [0, 0]])
    elif kind == "phase":
        e1 = np.array([[0, 0], [0, math.sqrt(eta)]])
    else:
        raise ChannelError(f"unknown channel kind {kind!r}")
    return KrausChannel((e0, e1), eta, kind)


def _apply_single(rho: np.ndarray, ops: Sequence[np.ndarray], target: int, n: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    out = np.zeros_like(t)
    for e in ops:
        x = np.tensordot(e, t, axes=([1], [target]))
        x = np.moveaxis(x, 0, target)
        x = np.tensordot(x, e.conj(), axes=([n + target], [1]))
        x = np.moveaxis(x, -1, n + target)
        out += x
    return out.reshape(rho.shape)


def apply_channel(
    rho: DensityOperator, ch: KrausChannel, targets: Sequence[int]
) -> DensityOperator:
    """Apply ``ch`` independently to every qubit in ``targets``."""
    if not isinstance(ch, KrausChannel):
        raise ChannelError("apply_channel needs a KrausChannel")
    n = rho.num_qubits
    targets = _validate_targets(n, targets)
    if ch.is_identity:
        return rho
    m = np.array(rho.matrix)
    for t in targets:
        m = _apply_single(m, ch.operators, t, n)
    # remove rounding asymmetry before validation
    m = (m + m.conj().T) / 2
    return DensityOperator(m)


def fidelity(rho: DensityOperator, target: StateVector) -> float:
    """<target|rho|target>, the squared fidelity against a pure reference."""
    if rho.num_qubits != target.num_qubits:
        raise QSimError(f"sizes differ: {rho.num_qubits} vs {target.num_qubits}")
    psi = target.amplitudes
    return float(min(1.0, max(0.0, np.vdot(psi, rho.matrix @ psi).real)))


def sample_kraus(
    state: StateVector, ch: KrausChannel, target: int, rng: np.random.Generator
) -> tuple[StateVector, int]:
    """One quantum-trajectory step: pick Kraus branch k with prob ||E_k psi||^2."""
    if ch.is_identity:
        return state, 0
    branches = [apply_matrix(state.amplitudes, e, [target]) for e in ch.operators]
    weights = np.array([np.vdot(b, b).real for b in branches])
    weights = weights / weights.sum()
    k = int(rng.choice(len(branches), p=weights))
    return StateVector.normalized(branches[k]), k


def embed(u: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of operator ``u`` acting on ``targets``."""
    dim = 2**n
    cols = [apply_matrix(np.eye(dim, dtype=complex)[:, j], np.asarray(u), targets) for j in range(dim)]
    return np.column_stack(cols)


def conjugate(rho: DensityOperator, u, targets: Sequence[int]) -> DensityOperator:
    """rho -> U rho U^dag with ``u`` (Unitary or matrix) on ``targets``."""
    n = rho.num_qubits
    targets = _validate_targets(n, targets)
    full = embed(getattr(u, "matrix", u), targets, n)
    m = full @ rho.matrix @ full.conj().T
    return DensityOperator((m + m.conj().T) / 2)


def partial_trace(rho: DensityOperator, keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on ``keep`` (in the listed order)."""
    n = rho.num_qubits
    keep = _validate_targets(n, keep)
    rest = [q for q in range(n) if q not in keep]
    t = rho.matrix.reshape((2,) * (2 * n)).transpose(keep + rest + [n + q for q in keep] + [n + q for q in rest])
    k, r = 2 ** len(keep), 2 ** len(rest)
    return np.einsum("arbr->ab", t.reshape(k, r, k, r))


def density_probabilities(rho: DensityOperator, basis: str, targets: Sequence[int], vectors=None) -> np.ndarray:
    """Born probabilities of measuring ``targets`` of a mixed state in ``basis``."""
    from .measure import basis_matrix

    red = partial_trace(rho, targets)
    b = basis_matrix(basis, len(targets), vectors)
    p = np.einsum("ji,jk,ki->i", b.conj(), red, b).real
    p = np.clip(p, 0.0, None)
    return p / p.sum()
