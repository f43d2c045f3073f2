"""The two GHZ-based baselines: iterative RKQAV and probabilistic WQAV."""

from __future__ import annotations

import math

import numpy as np

from ..errors import EavesdropAbort
from ..primitives.keys import establish_key, xor_bits
from ..qsim import Qubit, Register, hadamard, phase_gate, prepare_state
from .common import ProtocolConfig, RunOutcome, VotePolicy, VoteVector, fixed_policy
from .session import Session, guarded, open_session

_SZ = phase_gate(0)


def _deal_ghz(s: Session, copies: int) -> list[Register]:
    """CA prepares GHZ copies and sends qubit i of every copy to voter i."""
    n = s.cfg.n
    regs = [Register(prepare_state("ghz", n), f"ghz{c}") for c in range(copies)]
    s.net.transcript.log(s.ca.pid, s.ca.pid, "prepare", {"ghz": copies}, qubits=0)
    for i, v in enumerate(s.voters):
        s.net.transmit(s.ca.pid, v.pid, [Qubit(r, i) for r in regs], kind="ghz_particles")
    return regs


def _extra_copies(cfg: ProtocolConfig) -> int:
    """Sacrificial copies for the correlation check: ceil(delta0 * l)."""
    return int(math.ceil(cfg.delta0 * cfg.l - 1e-9)) if cfg.delta0 > 0 else 0


def _sacrificial(s: Session, copies: int, count: int) -> list[int]:
    if count == 0:
        return []
    picked = sorted(int(c) for c in s.rng.choice(copies, size=count, replace=False))
    s.net.broadcast(s.ca.pid, "check_copies", picked)
    s.net.drain_broadcasts()
    return picked


def _verdict(s: Session, cause: str, errors: int, checked: int) -> None:
    rate = errors / checked if checked else 0.0
    s.net.transcript.log(s.ca.pid, "*", "ghz_check_verdict", {"errors": errors, "checked": checked})
    if rate > s.cfg.decoys.error_threshold:
        raise EavesdropAbort(cause, rate)


def run_rkqav(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator,
              policy: VotePolicy | None = None) -> RunOutcome:
    """Iterative GHZ veto with the CA as dealer and joint GHZ-basis readout.

    Round t: vetoers apply sigma_z(t) to their qubit of a fresh copy, every
    voter returns that qubit, the CA measures the copy in the GHZ basis. The
    phase-flipped outcome means V_n = 1; after 1 + floor(log2 n) unflipped
    rounds V_n = 0.
    """
    cfg = cfg.validate()
    s = open_session(cfg, votes, rng)
    policy = policy or fixed_policy(votes)

    def body():
        n, net = cfg.n, s.net
        extra = _extra_copies(cfg)
        regs = _deal_ghz(s, cfg.l + extra)
        check = _sacrificial(s, len(regs), extra)
        if check:
            errors = 0
            for i, v in enumerate(s.voters):
                net.transmit(v.pid, s.ca.pid, [Qubit(regs[c], i) for c in check], kind="ghz_check_return")
            for c in check:
                errors += regs[c].measure("ghz", list(range(n)), rng).outcome != 0
            _verdict(s, "ghz_check", errors, len(check))
        unused = [c for c in range(len(regs)) if c not in check]
        outcomes = []
        for t in range(cfg.iteration_cap):
            c = unused.pop(int(rng.integers(len(unused))))
            net.broadcast(s.ca.pid, "copy_choice", c)
            round_votes = policy(t)
            for i, v in enumerate(s.voters):
                if round_votes.w[i]:
                    v.apply([Qubit(regs[c], i)], phase_gate(t))
                net.transmit(v.pid, s.ca.pid, [Qubit(regs[c], i)], kind="ghz_return", vote_dependent=True)
            out = regs[c].measure("ghz", list(range(n)), rng).outcome
            flipped = int(out == 1)
            outcomes.append(out)
            net.broadcast(s.ca.pid, "round_result", flipped, vote_dependent=True)
            net.drain_broadcasts()
            if flipped:
                return RunOutcome("rkqav", 1, True, t + 1, net.transcript, detail={"outcomes": outcomes})
        return RunOutcome("rkqav", 0, True, cfg.iteration_cap, net.transcript, detail={"outcomes": outcomes})

    return guarded("rkqav", s, body)


def run_wqav(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator) -> RunOutcome:
    """Probabilistic GHZ veto with masked reports to the CA.

    Vetoers flip each of their l particles with probability 1/2, everybody
    applies H and measures, and the CA learns the parity R_j of copy j
    through the one-time pads B_i. V_n = 1 iff some R_j = 1.
    """
    cfg = cfg.validate()
    s = open_session(cfg, votes, rng)

    def body():
        n, l, net = cfg.n, cfg.l, s.net
        pads = {}
        for v in s.voters:
            key_ca, _ = establish_key("bb84_qkd", net, s.ca, v, l)
            pads[v.pid] = key_ca.bits
        extra = _extra_copies(cfg)
        regs = _deal_ghz(s, l + extra)
        check = _sacrificial(s, len(regs), extra)
        if check:
            _local_ghz_check(s, regs, check)
        copies = [regs[c] for c in range(len(regs)) if c not in check]
        h = hadamard()
        parity = np.zeros(l, dtype=int)
        for i, v in enumerate(s.voters):
            t_bits = []
            for reg in copies:
                q = Qubit(reg, i)
                if votes.w[i] and rng.random() < 0.5:
                    v.apply([q], _SZ)
                v.apply([q], h)
                t_bits.append(v.measure(q, "computational", rng))
            y = xor_bits(t_bits, pads[v.pid])
            net.send(v.pid, s.ca.pid, "masked_report", list(y), vote_dependent=True)
            parity ^= np.array(xor_bits(net.recv(s.ca.pid, "masked_report"), pads[v.pid]))
        result = int(parity.any())
        net.broadcast(s.ca.pid, "result", result, vote_dependent=True)
        net.drain_broadcasts()
        return RunOutcome("wqav", result, True, 1, net.transcript, confidence=1 - 2.0**-l,
                          detail={"R": parity.tolist()})

    return guarded("wqav", s, body)


def _local_ghz_check(s: Session, regs: list[Register], check: list[int]) -> None:
    """Stabilizer test on sacrificial copies: all-Z outcomes agree, all-X parity is even."""
    rng, net = s.rng, s.net
    errors = 0
    for c in check:
        basis = "computational" if rng.random() < 0.5 else "diagonal"
        net.broadcast(s.ca.pid, "check_basis", basis)
        outs = []
        for i, v in enumerate(s.voters):
            outs.append(v.measure(Qubit(regs[c], i), basis, rng))
            net.send(v.pid, s.ca.pid, "check_outcome", outs[-1])
            net.recv(s.ca.pid, "check_outcome")
        if basis == "computational":
            errors += len(set(outs)) != 1
        else:
            errors += sum(outs) % 2
    net.drain_broadcasts()
    _verdict(s, "ghz_check", errors, len(check))
