"""Complete-graph DC-net style vetoes built on pairwise keys (QAV-1 to QAV-5).

Every voter broadcasts, per bit position, the XOR of the key bits it shares
with the others. Keys cancel pairwise in the total parity, so the CA's sum
S is 0 unless a vetoer randomised its contribution.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..primitives.keys import distribute_bell_pairs, establish_key
from ..qsim import hadamard, phase_gate
from .common import ProtocolConfig, RunOutcome, VotePolicy, VoteVector, fixed_policy
from .session import Session, guarded, open_session

_SZ = phase_gate(0)


def run_xor_veto(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator,
                 policy: VotePolicy | None = None) -> RunOutcome:
    """QAV-1 (any key method), QAV-2, QAV-3, QAV-4, and QAV-5 in iterative mode.

    QAV-2 and QAV-5 encode the veto in the quantum domain: vetoers apply
    sigma_z with probability 1/2 to each shared Bell half before H and
    measurement. The key-based variants flip broadcast bits instead.
    """
    cfg = cfg.validate()
    s = open_session(cfg, votes, rng, semiquantum=cfg.key_method == "semiquantum_mediated")
    policy = policy or fixed_policy(votes)
    p = cfg.protocol

    def body():
        if p == "qav5":
            for r in range(cfg.l):
                parity, shown = _bell_round(s, 1, policy(r))
                if parity.any():
                    return _outcome(s, 1, r + 1, parity, shown, 1.0)
            return _outcome(s, 0, cfg.l, parity, shown, 1 - 2.0**-cfg.l)
        if p == "qav2":
            parity, shown = _bell_round(s, cfg.l, policy(0))
        else:
            parity, shown = _key_round(s, policy(0))
        result = int(parity.any())
        return _outcome(s, result, 1, parity, shown, 1.0 if result else 1 - 2.0**-cfg.l)

    return guarded(p, s, body)


def _outcome(s: Session, result, iterations, parity, shown, confidence) -> RunOutcome:
    s.net.broadcast(s.ca.pid, "result", result, vote_dependent=True)
    s.net.drain_broadcasts()
    return RunOutcome(s.cfg.protocol, result, True, iterations, s.net.transcript, confidence=confidence,
                      detail={"S": parity.tolist(), "broadcasts": shown})


def _announce(s: Session, contributions: dict[int, np.ndarray]) -> tuple[np.ndarray, dict[str, list[int]]]:
    """Each voter broadcasts V^i; the CA sums them mod 2."""
    shown = {}
    total = None
    for i, v in enumerate(s.voters):
        bits = [int(b) for b in contributions[i]]
        s.net.broadcast(v.pid, "parity_share", bits, vote_dependent=True)
        shown[v.pid] = bits
        got = np.array(s.net.recv(s.ca.pid, "parity_share"), dtype=int)
        s.net.drain_broadcasts()
        total = got if total is None else total ^ got
    return total, shown


def _key_round(s: Session, votes: VoteVector):
    cfg, rng = s.cfg, s.rng
    n, l = cfg.n, cfg.l
    share = {i: np.zeros(l, dtype=int) for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        ka, kb = establish_key(cfg.key_method, s.net, s.voters[i], s.voters[j], l, mediator=s.ca)
        share[i] ^= np.array(ka.bits, dtype=int)
        share[j] ^= np.array(kb.bits, dtype=int)
    for i in votes.vetoers():
        share[i] ^= (rng.random(l) < 0.5).astype(int)
    return _announce(s, share)


def _bell_round(s: Session, copies: int, votes: VoteVector):
    cfg, rng, net = s.cfg, s.rng, s.net
    n = cfg.n
    held: dict[int, list] = {i: [] for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        qa, qb = distribute_bell_pairs(net, s.ca, s.voters[i], s.voters[j], copies)
        held[i].append(qa)
        held[j].append(qb)
    h = hadamard()
    share = {}
    for i, v in enumerate(s.voters):
        acc = np.zeros(copies, dtype=int)
        for seq in held[i]:
            for c, q in enumerate(seq):
                if votes.w[i] and rng.random() < 0.5:
                    v.apply([q], _SZ)
                v.apply([q], h)
                acc[c] ^= v.measure(q, "computational", rng)
        share[i] = acc
    return _announce(s, share)
