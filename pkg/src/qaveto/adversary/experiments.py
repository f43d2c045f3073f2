"""Detection experiments: how often do decoy checks catch Eve, and what does she learn?

Three targets:

``decoy``
    one decoy per trial; detection means the receiver's check on that decoy
    fails. Labels default to uniform BB84 states.
``run``
    ``decoys`` decoys per trial (one protected segment); detection means at
    least one of them fails.
``protocol``
    a full protocol run with the attack on every segment; detection means the
    run aborted.

Two engines compute the first two targets: ``vectorized`` evolves all trials
as rows of one array, ``segment`` pushes each trial through the real
``decoy_protect`` / tap / ``decoy_verify`` path.

Eve's information proxy is 2*accuracy - 1 for her guesses of payload bits
sent alongside the decoys (payload labels uniform over BB84 states, guess
read off her record), so 0 means she learned nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import ConfigError
from ..primitives.decoys import BB84_LABELS, ChannelSegment, DecoyConfig, decoy_protect, decoy_verify
from ..qsim import Qubit, Register, bb84_state, cnot, hadamard
from ..qsim.batch import batch_apply, batch_measure
from ..qsim.measure import basis_matrix
from .attacks import Attack, tap_entangle_measure, tap_intercept_resend

TARGETS = ("decoy", "run", "protocol")
ENGINES = ("vectorized", "segment")
_VALUE = {"0": 0, "1": 1, "+": 0, "-": 1}
_H = hadamard().matrix


@dataclass
class AttackReport:
    trials: int
    detections: int
    eve_info: float | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.detections / self.trials

    def sigma(self) -> float:
        """Binomial standard error of ``rate``."""
        p = self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        """Wilson score interval."""
        n, p = self.trials, self.rate
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)


def detection_experiment(
    target: str,
    attack: Attack,
    trials: int,
    rng: np.random.Generator,
    *,
    decoys: int = 20,
    labels: Sequence[str] = BB84_LABELS,
    engine: str = "vectorized",
    cfg=None,
    votes=None,
) -> AttackReport:
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if target not in TARGETS:
        raise ConfigError(f"unknown target {target!r}; choose one of {', '.join(TARGETS)}")
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}; choose one of {', '.join(ENGINES)}")
    if target == "protocol":
        return _protocol_experiment(attack, trials, rng, cfg, votes)
    per_trial = 1 if target == "decoy" else decoys
    if per_trial < 1:
        raise ConfigError("need at least one decoy per trial")
    labels = tuple(labels)
    if engine == "vectorized":
        flagged, acc = _vectorized(attack, trials, per_trial, labels, rng)
    else:
        flagged, acc = _segments(attack, trials, per_trial, labels, rng)
    detections = int(flagged.sum())
    detail = {"target": target, "engine": engine, "decoys_per_trial": per_trial,
              "accuracy": acc["all"], "accuracy_computational": acc["computational"],
              "accuracy_diagonal": acc["diagonal"]}
    return AttackReport(trials, detections, 2 * acc["all"] - 1, detail)


def _pick_labels(labels, size, rng) -> np.ndarray:
    return np.array(labels)[rng.integers(0, len(labels), size=size)]


def _accuracy(guess, payload_labels) -> dict[str, float]:
    truth = np.array([_VALUE[x] for x in payload_labels])
    diag = np.isin(payload_labels, ["+", "-"])
    ok = guess == truth

    def mean(mask):
        return float(ok[mask].mean()) if mask.any() else float("nan")

    return {"all": float(ok.mean()), "computational": mean(~diag), "diagonal": mean(diag)}


def _initial_rows(lab: np.ndarray) -> np.ndarray:
    rows = np.zeros((lab.size, 2), dtype=complex)
    for label in BB84_LABELS:
        rows[lab == label] = bb84_state(label).amplitudes
    return rows


def _attack_rows(attack: Attack, rows: np.ndarray, hit: np.ndarray, rng):
    """Apply the attack to single-qubit rows where ``hit``; returns (new rows, Eve outcomes)."""
    size = rows.shape[0]
    if attack.kind == "intercept_resend":
        diag = rng.random(size) < 0.5
        rows = batch_apply(rows, _H, [0], mask=diag & hit)
        out, post = batch_measure(rows, np.eye(2, dtype=complex), [0], rng)
        rows = np.where(hit[:, None], post, rows)
        rows = batch_apply(rows, _H, [0], mask=diag & hit)
        return rows, out, diag
    anc = np.array([attack.alpha, attack.beta], dtype=complex)
    # travel qubit 0, ancilla qubit 1; ancilla controls
    joint = np.einsum("ti,j->tij", rows, anc).reshape(size, 4)
    joint = batch_apply(joint, cnot().matrix, [1, 0], mask=hit)
    out, post = batch_measure(joint, basis_matrix(attack.ancilla_basis, 1), [1], rng)
    b = basis_matrix(attack.ancilla_basis, 1)
    travel = np.einsum("tij,tj->ti", post.reshape(size, 2, 2), b[:, out].T.conj())
    travel /= np.linalg.norm(travel, axis=1, keepdims=True)
    return travel, out, np.full(size, attack.ancilla_basis == "diagonal")


def _receiver_errors(rows: np.ndarray, lab: np.ndarray, rng) -> np.ndarray:
    diag = np.isin(lab, ["+", "-"])
    rows = batch_apply(rows, _H, [0], mask=diag)
    out, _ = batch_measure(rows, np.eye(2, dtype=complex), [0], rng)
    return out != np.array([_VALUE[x] for x in lab])


def _vectorized(attack, trials, per_trial, labels, rng):
    size = trials * per_trial
    tapped = np.ones(trials, dtype=bool) if attack.segment_fraction >= 1 else rng.random(trials) < attack.segment_fraction
    picked = np.ones(size, dtype=bool) if attack.qubit_fraction >= 1 else rng.random(size) < attack.qubit_fraction
    hit = np.repeat(tapped, per_trial) & picked
    lab = _pick_labels(labels, size, rng)
    rows, _, _ = _attack_rows(attack, _initial_rows(lab), hit, rng)
    flagged = _receiver_errors(rows, lab, rng).reshape(trials, per_trial).any(axis=1)
    # payload companions: same attack, Eve's outcome is her guess
    pay = _pick_labels(BB84_LABELS, trials, rng)
    _, guess, _ = _attack_rows(attack, _initial_rows(pay), np.ones(trials, dtype=bool), rng)
    return flagged, _accuracy(guess, pay)


def _segments(attack, trials, per_trial, labels, rng):
    flagged = np.zeros(trials, dtype=bool)
    guesses, pay_labels = [], []
    for t in range(trials):
        pay = str(_pick_labels(BB84_LABELS, 1, rng)[0])
        payload = [Qubit(Register(bb84_state(pay), "payload"), 0)]
        seg = ChannelSegment("A", "B", payload, DecoyConfig(ratio=per_trial), None, attack)
        seq, record = decoy_protect(seg, rng)
        if len(labels) != 4:
            seq, record = _relabel(seq, record, labels, rng)
        if attack.taps(rng):
            positions = attack.pick_positions(len(seq), rng)
            if attack.kind == "intercept_resend":
                rec = tap_intercept_resend(seq, rng, positions)
            else:
                rec = tap_entangle_measure(seq, attack, rng, positions)
            payload_pos = [i for i in range(len(seq)) if i not in set(record.positions)][0]
            g = rec.guesses().get(payload_pos)
        else:
            g = None
        verdict = decoy_verify(seq, record, rng)
        flagged[t] = verdict.errors > 0
        guesses.append(int(rng.integers(2)) if g is None else g)
        pay_labels.append(pay)
    return flagged, _accuracy(np.array(guesses), np.array(pay_labels))


def _relabel(seq, record, labels, rng):
    """Replace the decoys with states drawn from ``labels`` (for restricted-label tests)."""
    from ..primitives.decoys import DecoyRecord

    seq = list(seq)
    prepared = []
    for pos in record.positions:
        label = str(_pick_labels(labels, 1, rng)[0])
        seq[pos] = Qubit(Register(bb84_state(label), "decoy"), 0)
        prepared.append(label)
    return seq, DecoyRecord(record.subroutine, record.positions, tuple(prepared), record.pairs, record.total)


def _protocol_experiment(attack, trials, rng, cfg, votes) -> AttackReport:
    from dataclasses import replace

    from ..protocols import run_protocol

    if cfg is None or votes is None:
        raise ConfigError("protocol target needs cfg and votes")
    cfg = replace(cfg, attack=attack)
    detections = 0
    leaks = 0
    causes: dict[str, int] = {}
    for t in range(trials):
        out = run_protocol(cfg, votes, np.random.default_rng(rng.integers(2**63)))
        if out.aborted is not None:
            detections += 1
            causes[out.aborted.split(":")[0]] = causes.get(out.aborted.split(":")[0], 0) + 1
            leaks += vote_leak_before_abort(out.transcript)
    return AttackReport(trials, detections, None, {"target": "protocol", "causes": causes, "leaks": leaks})


def vote_leak_before_abort(transcript) -> bool:
    """True if vote-dependent information was exposed without a decoy check.

    A vote-dependent qubit hop must carry decoys and is verified by the
    next ``decoy_verdict``; a vote-dependent classical message may only be
    sent while no such hop is awaiting its verdict. Nothing may follow an
    abort.
    """
    pending = False
    for rec in transcript.records:
        if rec.kind == "abort":
            return rec is not transcript.records[-1]
        if rec.kind == "decoy_verdict":
            pending = False
        elif rec.vote_dependent:
            if rec.qubits:
                if not rec.decoys:
                    return True
                pending = True
            elif pending:
                return True
    return False


def expected_detection(attack: Attack, decoys: int = 1, labels: Sequence[str] = BB84_LABELS) -> float:
    """Closed-form probability that at least one of ``decoys`` decoys fails its check."""
    if attack.kind == "intercept_resend":
        per = 0.25  # wrong basis half the time, then a wrong outcome half the time
    else:
        per = attack.beta_sq * float(np.mean([x in ("0", "1") for x in labels]))
    per *= attack.qubit_fraction
    return attack.segment_fraction * (1 - (1 - per) ** decoys)
