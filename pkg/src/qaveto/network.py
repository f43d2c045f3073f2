"""Parties, a FIFO message bus and the replayable transcript it produces.

Every classical message and every qubit transmission of a run goes through a
``Network``. Qubit transmissions are decoy-protected by default: the sender
interleaves decoys, Eve (if present) taps the sequence, travel noise hits
each qubit, the receiver acknowledges, the sender reveals the decoy map and
the receiver checks it. A failed check raises ``EavesdropAbort``.

Transcript lines are tab separated::

    seq  sender  receiver  kind  digest

where ``digest`` is the first 16 hex digits of SHA-256 over the canonical
JSON of the payload (qubit payloads are summarized by their counts).
"""

from __future__ import annotations

import hashlib
import json
import zlib
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .adversary.attacks import Attack, EveRecord, tap_entangle_measure, tap_intercept_resend
from .errors import CapabilityError, EavesdropAbort
from .primitives.decoys import ChannelSegment, DecoyConfig, decoy_protect, decoy_verify, extract_payload
from .qsim import Qubit, Register, Unitary, bb84_state
from .qsim.channels import KrausChannel

BROADCAST = "*"


def derive_rng(seed: int, *labels: Any) -> np.random.Generator:
    """Independent stream for (seed, labels...); stable across runs and platforms."""
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    for lab in labels:
        words.append(zlib.crc32(str(lab).encode()))
    return np.random.default_rng(np.random.SeedSequence(words))


class Party:
    """A protocol participant with a private record nobody else reads.

    ``semiquantum`` parties may only measure or prepare in the computational
    basis, or reflect qubits untouched.
    """

    def __init__(self, pid: str, semiquantum: bool = False):
        self.pid = pid
        self.semiquantum = semiquantum
        self.private: dict[str, Any] = {}

    def measure(self, qubit: Qubit, basis: str, rng) -> int:
        if self.semiquantum and basis != "computational":
            raise CapabilityError(f"{self.pid} is semiquantum and cannot measure in the {basis} basis")
        return qubit.measure(basis, rng)

    def prepare(self, label: str) -> Qubit:
        if self.semiquantum and label not in ("0", "1"):
            raise CapabilityError(f"{self.pid} is semiquantum and cannot prepare |{label}>")
        return Qubit(Register(bb84_state(label), self.pid), 0)

    def apply(self, qubits: Sequence[Qubit], u: Unitary) -> None:
        if self.semiquantum:
            raise CapabilityError(f"{self.pid} is semiquantum and cannot apply {u.label}")
        reg = qubits[0].register
        if any(q.register is not reg for q in qubits):
            raise ValueError("multi-qubit operation across separate registers")
        reg.apply(u, [q.index for q in qubits])

    def __repr__(self):
        kind = "semiquantum " if self.semiquantum else ""
        return f"<{kind}party {self.pid}>"


def _canonical(payload: Any) -> Any:
    if isinstance(payload, np.ndarray):
        return payload.tolist()
    if isinstance(payload, (list, tuple)):
        return [_canonical(p) for p in payload]
    if isinstance(payload, dict):
        return {str(k): _canonical(v) for k, v in sorted(payload.items(), key=lambda kv: str(kv[0]))}
    if isinstance(payload, (np.integer,)):
        return int(payload)
    if isinstance(payload, (np.floating,)):
        return float(payload)
    return payload


def payload_digest(payload: Any) -> str:
    text = json.dumps(_canonical(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Record:
    seq: int
    sender: str
    receiver: str
    kind: str
    digest: str
    qubits: int = 0
    decoys: int = 0
    bits: int = 0
    vote_dependent: bool = False

    def line(self) -> str:
        return f"{self.seq}\t{self.sender}\t{self.receiver}\t{self.kind}\t{self.digest}"


@dataclass
class Transcript:
    header: dict[str, Any] = field(default_factory=dict)
    records: list[Record] = field(default_factory=list)
    private: dict[str, list[tuple[str, Any]]] = field(default_factory=dict)

    def log(self, sender, receiver, kind, payload, **counts) -> Record:
        rec = Record(len(self.records), sender, receiver, kind, payload_digest(payload), **counts)
        self.records.append(rec)
        return rec

    def note(self, pid: str, key: str, value: Any) -> None:
        """Entry in ``pid``'s private view; never part of the public lines."""
        self.private.setdefault(pid, []).append((key, _canonical(value)))

    def kinds(self) -> list[str]:
        return [r.kind for r in self.records]

    def lines(self) -> list[str]:
        head = "# " + json.dumps(_canonical(self.header), sort_keys=True)
        return [head] + [r.line() for r in self.records]

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps())
        return path

    def count(self, kind: str | None = None) -> dict[str, int]:
        sel = [r for r in self.records if kind is None or r.kind == kind]
        return {
            "messages": len(sel),
            "qubits": sum(r.qubits for r in sel),
            "decoys": sum(r.decoys for r in sel),
            "bits": sum(r.bits for r in sel),
        }


@dataclass
class Message:
    sender: str
    receiver: str
    kind: str
    payload: Any


class Network:
    """Deterministic FIFO bus for one run."""

    def __init__(
        self,
        rng: np.random.Generator,
        channel: KrausChannel | None = None,
        decoys: DecoyConfig | None = None,
        attack: Attack | None = None,
        transcript: Transcript | None = None,
    ):
        self.rng = rng
        self.channel = channel
        self.decoys = decoys or DecoyConfig()
        self.attack = attack
        self.transcript = transcript if transcript is not None else Transcript()
        self.parties: dict[str, Party] = {}
        self.eve = Party("Eve")
        self.eve.private["records"] = []
        self._queue: deque[Message] = deque()

    def add(self, *parties: Party) -> None:
        for p in parties:
            self.parties[p.pid] = p

    # classical traffic

    def send(self, sender: str, receiver: str, kind: str, payload: Any, bits: int | None = None,
             vote_dependent: bool = False) -> None:
        if bits is None:
            bits = _bit_count(payload)
        self.transcript.log(sender, receiver, kind, payload, bits=bits, vote_dependent=vote_dependent)
        self._queue.append(Message(sender, receiver, kind, payload))

    def broadcast(self, sender: str, kind: str, payload: Any, vote_dependent: bool = False) -> None:
        self.send(sender, BROADCAST, kind, payload, vote_dependent=vote_dependent)

    def recv(self, receiver: str, kind: str | None = None) -> Any:
        """Next message addressed to ``receiver`` (or broadcast), in FIFO order."""
        for i, msg in enumerate(self._queue):
            if msg.receiver in (receiver, BROADCAST) and (kind is None or msg.kind == kind):
                if msg.receiver == receiver:
                    del self._queue[i]
                return msg.payload
        raise LookupError(f"no pending {kind or 'message'} for {receiver}")

    def drain_broadcasts(self) -> None:
        self._queue = deque(m for m in self._queue if m.receiver != BROADCAST)

    # quantum traffic

    def transmit(self, sender: str, receiver: str, qubits: Sequence[Qubit], kind: str = "qubits",
                 protect: bool = True, vote_dependent: bool = False,
                 decoys: DecoyConfig | None = None, before_reveal=None) -> list[Qubit]:
        """Send ``qubits`` over one hop and return them as held by ``receiver``.

        With ``protect`` the full decoy handshake runs and a failed check
        raises ``EavesdropAbort``; otherwise the qubits just travel (noise
        and Eve still act). ``before_reveal`` runs between the ack and the
        decoy-map reveal.
        """
        qubits = list(qubits)
        cfg = decoys or self.decoys
        if protect:
            seg = ChannelSegment(sender, receiver, qubits, cfg, self.channel, self.attack)
            sequence, record = decoy_protect(seg, self.rng)
        else:
            sequence, record = qubits, None
        n_decoys = len(sequence) - len(qubits)
        self.transcript.log(sender, receiver, kind, {"qubits": len(qubits), "decoys": n_decoys},
                            qubits=len(qubits), decoys=n_decoys, vote_dependent=vote_dependent)
        self._tap(sender, receiver, sequence)
        if self.channel is not None and not self.channel.is_identity:
            for q in sequence:
                q.noise(self.channel, self.rng)
        if record is None:
            return sequence
        self.send(receiver, sender, "ack", {"received": len(sequence)}, bits=0)
        self.recv(sender, "ack")
        if before_reveal is not None:
            before_reveal()
        reveal = {"positions": list(record.positions), "prepared": list(record.prepared),
                  "pairs": [list(p) for p in record.pairs]}
        self.send(sender, receiver, "decoy_reveal", reveal, bits=0)
        self.recv(receiver, "decoy_reveal")
        semiquantum = self.parties.get(receiver, Party(receiver)).semiquantum
        verdict = decoy_verify(sequence, record, self.rng, cfg.error_threshold, semiquantum=semiquantum)
        self.transcript.log(receiver, BROADCAST, "decoy_verdict",
                            {"hop": f"{sender}->{receiver}", "errors": verdict.errors,
                             "checked": verdict.checked, "verdict": verdict.verdict})
        if not verdict.passed:
            raise EavesdropAbort(f"decoy:{sender}->{receiver}", verdict.error_rate)
        return extract_payload(sequence, record)

    def _tap(self, sender: str, receiver: str, sequence: Sequence[Qubit]) -> None:
        attack = self.attack
        if attack is None or not attack.taps(self.rng):
            return
        positions = attack.pick_positions(len(sequence), self.rng)
        if attack.kind == "intercept_resend":
            rec = tap_intercept_resend(sequence, self.rng, positions)
        else:
            rec = tap_entangle_measure(sequence, attack, self.rng, positions)
        self.eve.private["records"].append((f"{sender}->{receiver}", rec))


def _bit_count(payload: Any) -> int:
    if isinstance(payload, (list, tuple, np.ndarray)):
        return int(sum(_bit_count(p) for p in payload))
    if isinstance(payload, (bool, int, np.integer)) and payload in (0, 1):
        return 1
    return 0


__all__ = [
    "BROADCAST",
    "EveRecord",
    "Message",
    "Network",
    "Party",
    "Record",
    "Transcript",
    "derive_rng",
    "payload_digest",
]
