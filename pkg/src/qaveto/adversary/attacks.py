"""Individual attacks Eve can mount on a qubit sequence in flight."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..qsim import Qubit, StateVector, cnot
from ..qsim.measure import basis_matrix

ATTACK_KINDS = ("intercept_resend", "entangle_measure")


@dataclass(frozen=True)
class Attack:
    """Attack model.

    ``segment_fraction`` is the probability that a given channel segment is
    tapped; ``qubit_fraction`` the probability that each qubit of a tapped
    sequence is attacked (Eve cannot tell decoys from payload).
    """

    kind: str
    alpha: complex = 1.0
    beta: complex = 0.0
    segment_fraction: float = 1.0
    qubit_fraction: float = 1.0
    ancilla_basis: str = "diagonal"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if self.kind == "entangle_measure" and abs(norm - 1) > 1e-10:
            raise ValueError(f"ancilla amplitudes must satisfy |a|^2+|b|^2=1 (got {norm})")
        for name in ("segment_fraction", "qubit_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def entangle(cls, beta_sq: float, **kw) -> "Attack":
        """Entangle-measure with real amplitudes and |beta|^2 = ``beta_sq``."""
        return cls("entangle_measure", math.sqrt(1 - beta_sq), math.sqrt(beta_sq), **kw)

    @property
    def beta_sq(self) -> float:
        return abs(self.beta) ** 2

    def taps(self, rng: np.random.Generator) -> bool:
        return self.segment_fraction >= 1.0 or rng.random() < self.segment_fraction

    def pick_positions(self, size: int, rng: np.random.Generator) -> list[int]:
        if self.qubit_fraction >= 1.0:
            return list(range(size))
        mask = rng.random(size) < self.qubit_fraction
        return [int(i) for i in np.flatnonzero(mask)]


@dataclass
class EveRecord:
    """Eve's side information: per attacked position, her basis and outcome."""

    positions: list[int] = field(default_factory=list)
    bases: list[str] = field(default_factory=list)
    outcomes: list[int] = field(default_factory=list)

    def guesses(self) -> dict[int, int]:
        return dict(zip(self.positions, self.outcomes))


def tap_intercept_resend(
    sequence: Sequence[Qubit], rng: np.random.Generator, positions: Sequence[int] | None = None
) -> EveRecord:
    """Measure each targeted qubit in a random BB84 basis and forward the eigenstate.

    Measuring in place leaves exactly the eigenstate Eve would resend, so the
    forwarded qubit is the collapsed one.
    """
    rec = EveRecord()
    if positions is None:
        positions = range(len(sequence))
    for pos in positions:
        basis = "computational" if rng.random() < 0.5 else "diagonal"
        outcome = sequence[pos].measure(basis, rng)
        rec.positions.append(int(pos))
        rec.bases.append(basis)
        rec.outcomes.append(outcome)
    return rec


def tap_entangle_measure(
    sequence: Sequence[Qubit],
    attack: Attack,
    rng: np.random.Generator,
    positions: Sequence[int] | None = None,
) -> EveRecord:
    """CNOT from an ancilla alpha|0>+beta|1> (control) onto each targeted qubit.

    Eve's ancilla is measured straight away in ``attack.ancilla_basis`` and
    then dropped; since it is never touched again this gives the same joint
    statistics as holding it until the end of the run.
    """
    rec = EveRecord()
    if positions is None:
        positions = range(len(sequence))
    ancilla = StateVector(np.array([attack.alpha, attack.beta], dtype=complex))
    gate = cnot()
    b = basis_matrix(attack.ancilla_basis, 1)
    for pos in positions:
        q = sequence[pos]
        reg = q.register
        a = reg.extend(ancilla)
        reg.apply(gate, [a, q.index])
        m = reg.measure(attack.ancilla_basis, [a], rng)
        _drop_last(reg, b[:, m.outcome])
        rec.positions.append(int(pos))
        rec.bases.append(attack.ancilla_basis)
        rec.outcomes.append(m.outcome)
    return rec


def _drop_last(reg, vector: np.ndarray) -> None:
    """Remove the last qubit of ``reg``, known to be in the product state ``vector``."""
    amps = reg.state.amplitudes.reshape(-1, 2)
    reg.state = StateVector.normalized(amps @ vector.conj())
