"""Mutable registers and qubit handles used by the protocol simulations.

A ``Register`` owns one pure state; noise is unravelled into sampled Kraus
branches so runs stay in state-vector form. Qubits are addressed through
``Qubit`` handles that survive register growth (ancillas are appended at the
end, so existing indices never move).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import KrausChannel, sample_kraus
from .measure import MeasurementRecord, measure
from .states import StateVector, Unitary, apply_unitary, bb84_state


class Register:
    __slots__ = ("state", "label")

    def __init__(self, state: StateVector, label: str = ""):
        self.state = state
        self.label = label

    @property
    def num_qubits(self) -> int:
        return self.state.num_qubits

    def qubits(self) -> list["Qubit"]:
        return [Qubit(self, i) for i in range(self.num_qubits)]

    def apply(self, u: Unitary, targets: Sequence[int]) -> None:
        self.state = apply_unitary(self.state, u, targets)

    def noise(self, ch: KrausChannel, target: int, rng: np.random.Generator) -> int:
        self.state, k = sample_kraus(self.state, ch, target, rng)
        return k

    def measure(self, basis: str, targets: Sequence[int], rng, vectors=None) -> MeasurementRecord:
        rec = measure(self.state, basis, targets, rng, vectors)
        self.state = rec.post_state
        return rec

    def extend(self, extra: StateVector) -> int:
        """Tensor ``extra`` onto the end; returns the index of its first qubit."""
        offset = self.num_qubits
        self.state = self.state.tensor(extra)
        return offset

    def __repr__(self):
        return f"Register({self.label!r}, {self.num_qubits} qubits)"


@dataclass(frozen=True, eq=False)
class Qubit:
    register: Register
    index: int

    def apply(self, u: Unitary) -> None:
        self.register.apply(u, [self.index])

    def measure(self, basis: str, rng) -> int:
        return self.register.measure(basis, [self.index], rng).outcome

    def noise(self, ch: KrausChannel, rng) -> int:
        return self.register.noise(ch, self.index, rng)


def fresh_qubit(label: str, tag: str = "") -> Qubit:
    """A single-qubit register in a BB84 state ``0``, ``1``, ``+`` or ``-``."""
    return Qubit(Register(bb84_state(label), tag), 0)


def apply_to(qubits: Sequence[Qubit], u: Unitary) -> None:
    """Apply a multi-qubit operator to handles that share one register."""
    regs = {id(q.register) for q in qubits}
    if len(regs) != 1:
        raise ValueError("multi-qubit operation across separate registers")
    qubits[0].register.apply(u, [q.index for q in qubits])
