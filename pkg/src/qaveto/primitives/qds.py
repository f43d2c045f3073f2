"""Elimination-signature authentication built from BB84 states.

At enrollment the voter sends random BB84 states; the CA measures each in a
random basis and records the one state the voter certainly did not send. At
voting time the voter declares what was sent and the CA counts declarations
that hit an eliminated state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..qsim import Qubit, Register, bb84_state
from ..qsim.channels import KrausChannel
from .decoys import BB84_LABELS

_ELIMINATED = {
    ("computational", 0): "1",
    ("computational", 1): "0",
    ("diagonal", 0): "-",
    ("diagonal", 1): "+",
}


@dataclass(frozen=True)
class EliminationSignature:
    voter: str
    eliminated: tuple[str, ...]
    measurement_bases: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.eliminated)


class QDSVerdict(NamedTuple):
    accepted: bool
    mismatch_fraction: float


def eliminated_state(basis: str, outcome: int) -> str:
    """The BB84 state orthogonal to the observed outcome in the measured basis."""
    return _ELIMINATED[(basis, outcome)]


def qds_enroll(
    voter: str,
    length: int,
    rng: np.random.Generator,
    sent: Sequence[str] | None = None,
    channel: KrausChannel | None = None,
) -> tuple[EliminationSignature, tuple[str, ...]]:
    """Run enrollment; returns the CA's signature record and the voter's secret states."""
    if length < 1:
        raise ValueError(f"signature length must be at least 1, got {length}")
    if sent is None:
        sent = tuple(BB84_LABELS[i] for i in rng.integers(0, 4, size=length))
    sent = tuple(sent)
    if len(sent) != length:
        raise ValueError("sent states do not match the signature length")
    eliminated, bases = [], []
    for label in sent:
        q = Qubit(Register(bb84_state(label), voter), 0)
        if channel is not None:
            q.noise(channel, rng)
        basis = "computational" if rng.random() < 0.5 else "diagonal"
        outcome = q.measure(basis, rng)
        bases.append(basis)
        eliminated.append(eliminated_state(basis, outcome))
    return EliminationSignature(voter, tuple(eliminated), tuple(bases)), sent


def qds_verify(declared: Sequence[str], sig: EliminationSignature, threshold: float) -> QDSVerdict:
    """Accept iff the fraction of declarations equal to an eliminated state is <= threshold."""
    declared = tuple(declared)
    if len(declared) != sig.length:
        raise ValueError(f"declared {len(declared)} states for a length-{sig.length} signature")
    hits = sum(d == e for d, e in zip(declared, sig.eliminated))
    frac = hits / sig.length
    return QDSVerdict(frac <= threshold, frac)
