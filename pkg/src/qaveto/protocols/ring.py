"""Circular protocols: travel qubits go CA -> V_0 -> ... -> V_{n-1} -> CA.

QAV-6 sends one half of a Bell pair around per iteration and reads the
accumulated sigma_z(t) phase with a Bell measurement. QAV-7 sends the travel
part of an m-qubit state once; voters apply their dense-coding operations
and the CA projects back onto the initial state.
"""

from __future__ import annotations

import numpy as np

from ..qsim import Qubit, Register, completed_basis, phase_gate, prepare_state
from .common import ProtocolConfig, RunOutcome, VotePolicy, VoteVector, fixed_policy
from .session import Session, guarded, open_session
from .subgroups import SubgroupAssignment, assign_subgroups, resource_state, voter_deduce


def _ring(s: Session, travelling: list[Qubit], encode, kind: str) -> list[Qubit]:
    """Pass ``travelling`` around the ring; ``encode(i, voter, qubits)`` runs at each stop."""
    net = s.net
    qubits = net.transmit(s.ca.pid, s.voters[0].pid, travelling, kind=kind)
    for i, v in enumerate(s.voters):
        encode(i, v, qubits)
        nxt = s.voters[i + 1].pid if i + 1 < len(s.voters) else s.ca.pid
        qubits = net.transmit(v.pid, nxt, qubits, kind=kind, vote_dependent=True)
    return qubits


def run_qav6(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator,
             policy: VotePolicy | None = None) -> RunOutcome:
    """Iterative Bell-pair ring; iteration t uses sigma_z(t) to veto.

    The CA reads phi- as V_n = 1. Anything else is inconclusive, and V_n = 0
    is concluded after 1 + floor(log2 n) inconclusive iterations.
    """
    cfg = cfg.validate()
    s = open_session(cfg, votes, rng)
    policy = policy or fixed_policy(votes)

    def body():
        net = s.net
        outcomes = []
        for t in range(cfg.iteration_cap):
            reg = Register(prepare_state("bell"), f"ring{t}")
            net.transcript.log(s.ca.pid, s.ca.pid, "prepare", {"bell": 1, "iteration": t}, qubits=2)
            round_votes = policy(t)
            gate = phase_gate(t)

            def encode(i, v, qubits):
                if round_votes.w[i]:
                    v.apply(qubits, gate)

            back = _ring(s, [Qubit(reg, 1)], encode, "travel")
            out = reg.measure("bell", [0, back[0].index], rng).outcome
            outcomes.append(out)
            flipped = int(out == 3)
            net.broadcast(s.ca.pid, "round_result", flipped, vote_dependent=True)
            net.drain_broadcasts()
            if flipped:
                return RunOutcome("qav6", 1, True, t + 1, net.transcript, detail={"outcomes": outcomes})
        return RunOutcome("qav6", 0, True, cfg.iteration_cap, net.transcript, detail={"outcomes": outcomes})

    return guarded("qav6", s, body)


def run_qav7(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator,
             assignment: SubgroupAssignment | None = None) -> RunOutcome:
    """Single-pass dense-coding ring. ``result`` is the CA bit C_n.

    C_n = 0 iff the final state equals the initial one up to phase, i.e.
    iff k is 0 or n. Each voter's deduced V_n is in ``voter_views``.
    """
    cfg = cfg.validate()
    s = open_session(cfg, votes, rng)

    def body():
        net = s.net
        table = assignment or assign_subgroups(cfg.n, cfg.state_kind, rng, cfg.m, cfg.travel)
        if table.travel != cfg.travel or table.m != cfg.m:
            raise ValueError(f"assignment acts on {table.travel} of {table.m} qubits; config says "
                             f"{cfg.travel} of {cfg.m}")
        for v, op in zip(s.voters, table.ops):
            v.private["operation"] = op.label
        psi = resource_state(cfg.state_kind, cfg.m)
        reg = Register(psi, "qav7")
        net.transcript.log(s.ca.pid, s.ca.pid, "prepare", {"qubits": cfg.m}, qubits=cfg.m)
        targets = table.travel_targets()

        def encode(i, v, qubits):
            if votes.w[i]:
                v.apply(qubits, table.ops[i])

        back = _ring(s, [Qubit(reg, t) for t in targets], encode, "travel")
        order = list(range(cfg.m - cfg.travel)) + [q.index for q in back]
        rec = reg.measure("custom", order, rng, vectors=completed_basis(psi))
        ca_bit = int(rec.outcome != 0)
        net.broadcast(s.ca.pid, "result", ca_bit)
        net.drain_broadcasts()
        views = {v.pid: voter_deduce(ca_bit, w) for v, w in zip(s.voters, votes.w)}
        return RunOutcome("qav7", ca_bit, True, 1, net.transcript, voter_views=views,
                          detail={"outcome": rec.outcome})

    return guarded("qav7", s, body)
