"""Decoy-qubit eavesdropping checks (BB84-state and entangled-pair variants)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import CapabilityError, DecoyMapError
from ..qsim import Qubit, Register, bb84_state, prepare_state
from ..qsim.channels import KrausChannel

SUBROUTINES = ("bb84_decoys", "gv_decoys")
BB84_LABELS = ("0", "1", "+", "-")
_BASIS_OF = {"0": "computational", "1": "computational", "+": "diagonal", "-": "diagonal"}
_VALUE_OF = {"0": 0, "1": 1, "+": 0, "-": 1}


@dataclass(frozen=True)
class DecoyConfig:
    ratio: float = 1.0
    subroutine: str = "bb84_decoys"
    error_threshold: float = 0.0

    def __post_init__(self):
        if not self.ratio > 0:
            raise ValueError(f"decoy ratio must be positive, got {self.ratio}")
        if self.subroutine not in SUBROUTINES:
            raise ValueError(f"unknown decoy subroutine {self.subroutine!r}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError(f"error threshold must lie in [0, 1], got {self.error_threshold}")

    def count_for(self, payload_size: int) -> int:
        raw = self.ratio * payload_size
        if payload_size < 1:
            raise ValueError("cannot protect an empty payload")
        if raw < 1 - 1e-12:
            raise ValueError(f"ratio {self.ratio} x {payload_size} qubits gives no decoys")
        return int(math.ceil(raw - 1e-9))


@dataclass
class ChannelSegment:
    sender: str
    receiver: str
    payload: list[Qubit]
    decoys: DecoyConfig = field(default_factory=DecoyConfig)
    noise: KrausChannel | None = None
    adversary_tap: Any = None


@dataclass(frozen=True)
class DecoyRecord:
    """Sender's secret: where the decoys sit and what was prepared there.

    For ``bb84_decoys`` ``prepared[i]`` is a BB84 label; for ``gv_decoys``
    ``pairs`` lists (position, partner position) of each phi+ pair.
    """

    subroutine: str
    positions: tuple[int, ...]
    prepared: tuple[str, ...] = ()
    pairs: tuple[tuple[int, int], ...] = ()
    total: int = 0


@dataclass(frozen=True)
class DecoyVerdict:
    error_rate: float
    errors: int
    checked: int
    verdict: str  # "proceed" or "abort"

    @property
    def passed(self) -> bool:
        return self.verdict == "proceed"


def decoy_protect(segment: ChannelSegment, rng: np.random.Generator) -> tuple[list[Qubit], DecoyRecord]:
    """Interleave decoys into ``segment.payload`` at uniformly random secret positions.

    Payload order is preserved; only the decoy slots are random.
    """
    payload = list(segment.payload)
    if not payload:
        raise ValueError("cannot protect an empty payload")
    cfg = segment.decoys
    count = cfg.count_for(len(payload))
    if cfg.subroutine == "gv_decoys":
        count += count % 2
    total = len(payload) + count
    slots = np.sort(rng.choice(total, size=count, replace=False))
    decoys: list[Qubit] = []
    prepared: list[str] = []
    if cfg.subroutine == "bb84_decoys":
        labels = rng.integers(0, 4, size=count)
        for lab in labels:
            label = BB84_LABELS[lab]
            prepared.append(label)
            decoys.append(Qubit(Register(bb84_state(label), "decoy"), 0))
        pairs: tuple = ()
    else:
        # pair up decoy slots randomly so partner positions are also secret
        order = rng.permutation(count)
        pair_list = []
        decoys = [None] * count  # type: ignore[list-item]
        for a, b in zip(order[0::2], order[1::2]):
            reg = Register(prepare_state("bell"), "gv-decoy")
            decoys[a] = Qubit(reg, 0)
            decoys[b] = Qubit(reg, 1)
            pair_list.append((int(slots[a]), int(slots[b])))
        pairs = tuple(pair_list)
    sequence: list[Qubit] = []
    it_payload = iter(payload)
    decoy_at = {int(s): i for i, s in enumerate(slots)}
    for pos in range(total):
        if pos in decoy_at:
            sequence.append(decoys[decoy_at[pos]])
        else:
            sequence.append(next(it_payload))
    record = DecoyRecord(
        subroutine=cfg.subroutine,
        positions=tuple(int(s) for s in slots),
        prepared=tuple(prepared),
        pairs=pairs,
        total=total,
    )
    return sequence, record


def _check_map(received: Sequence[Qubit], record: DecoyRecord) -> None:
    if record.total != len(received):
        raise DecoyMapError(f"map describes {record.total} qubits, received {len(received)}")
    pos = record.positions
    if len(set(pos)) != len(pos) or any(not 0 <= p < len(received) for p in pos):
        raise DecoyMapError("decoy positions are duplicated or out of range")
    if record.subroutine == "bb84_decoys" and len(record.prepared) != len(pos):
        raise DecoyMapError("prepared-state record length does not match positions")
    if record.subroutine == "gv_decoys":
        flat = [p for pair in record.pairs for p in pair]
        if sorted(flat) != sorted(pos):
            raise DecoyMapError("entangled decoy pairs do not cover the decoy positions")


def decoy_verify(
    received: Sequence[Qubit],
    record: DecoyRecord,
    rng: np.random.Generator,
    threshold: float = 0.0,
    semiquantum: bool = False,
) -> DecoyVerdict:
    """Measure the decoys as revealed and compare with what was prepared.

    ``error_rate`` is mismatches over decoys checked (pairs count once for
    ``gv_decoys``); the verdict is ``abort`` iff it exceeds ``threshold``.
    """
    _check_map(received, record)
    errors = 0
    if record.subroutine == "bb84_decoys":
        for pos, label in zip(record.positions, record.prepared):
            basis = _BASIS_OF[label]
            if semiquantum and basis != "computational":
                raise CapabilityError("semiquantum party cannot measure in the diagonal basis")
            outcome = received[pos].measure(basis, rng)
            errors += outcome != _VALUE_OF[label]
        checked = len(record.positions)
    else:
        if semiquantum:
            raise CapabilityError("semiquantum party cannot perform Bell measurements")
        for a, b in record.pairs:
            qa, qb = received[a], received[b]
            if qa.register is not qb.register:
                raise DecoyMapError("paired decoy positions hold unrelated qubits")
            rec = qa.register.measure("bell", [qa.index, qb.index], rng)
            errors += rec.outcome != 0
        checked = len(record.pairs)
    rate = errors / checked if checked else 0.0
    return DecoyVerdict(rate, errors, checked, "abort" if rate > threshold else "proceed")


def extract_payload(received: Sequence[Qubit], record: DecoyRecord) -> list[Qubit]:
    _check_map(received, record)
    skip = set(record.positions)
    return [q for i, q in enumerate(received) if i not in skip]
