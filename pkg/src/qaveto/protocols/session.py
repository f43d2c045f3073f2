"""Setup shared by every protocol run: network, parties and authentication."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import EavesdropAbort
from ..network import Network, Party, Transcript
from ..primitives.qds import qds_enroll, qds_verify
from .common import ProtocolConfig, RunOutcome, VoteVector


@dataclass
class Session:
    cfg: ProtocolConfig
    net: Network
    ca: Party
    voters: list[Party]

    @property
    def rng(self) -> np.random.Generator:
        return self.net.rng


def open_session(cfg: ProtocolConfig, votes: VoteVector, rng: np.random.Generator,
                 semiquantum: bool = False) -> Session:
    if votes.n != cfg.n:
        raise ValueError(f"config has n={cfg.n} voters but {votes.n} votes were given")
    header = {"protocol": cfg.protocol, "n": cfg.n, "l": cfg.l, "seed": cfg.seed}
    for key in ("key_method", "m", "travel", "state_kind"):
        if getattr(cfg, key) is not None:
            header[key] = getattr(cfg, key)
    if cfg.noise is not None:
        header["noise"] = {"kind": cfg.noise.kind, "eta": cfg.noise.damping}
    if cfg.attack is not None:
        header["attack"] = cfg.attack.kind
    net = Network(rng, cfg.noise, cfg.decoys, cfg.attack, Transcript(header))
    ca = Party("CA")
    voters = [Party(f"V{i}", semiquantum=semiquantum) for i in range(cfg.n)]
    net.add(ca, *voters)
    for v, w in zip(voters, votes.w):
        v.private["vote"] = w
    return Session(cfg, net, ca, voters)


def authenticate(s: Session, impostor: str | None = None) -> None:
    """Elimination-signature enrollment and check for every voter.

    ``impostor`` names a voter whose declaration is replaced by uniformly
    random BB84 labels, as a stand-in for someone without the secret.
    """
    cfg, net, rng = s.cfg, s.net, s.rng
    for v in s.voters:
        sig, sent = qds_enroll(v.pid, cfg.qds_length, rng)
        v.private["qds_sent"] = sent
        net.transcript.log(v.pid, s.ca.pid, "qds_enroll", {"qubits": sig.length}, qubits=sig.length)
        declared = sent
        if v.pid == impostor:
            declared = tuple("01+-"[i] for i in rng.integers(0, 4, size=sig.length))
        net.send(v.pid, s.ca.pid, "qds_declare", list(declared), bits=0)
        net.recv(s.ca.pid, "qds_declare")
        verdict = qds_verify(declared, sig, cfg.qds_threshold)
        net.transcript.log(s.ca.pid, "*", "qds_verdict",
                           {"voter": v.pid, "accepted": verdict.accepted, "mismatch": verdict.mismatch_fraction})
        if not verdict.accepted:
            raise EavesdropAbort(f"qds:{v.pid}", verdict.mismatch_fraction)


def guarded(protocol: str, s: Session, body: Callable[[], RunOutcome]) -> RunOutcome:
    """Run ``body``; a failed security check becomes an aborted outcome."""
    try:
        if s.cfg.qds:
            authenticate(s)
        return body()
    except EavesdropAbort as err:
        s.net.transcript.log("*", "*", "abort", {"cause": err.cause})
        return RunOutcome(protocol, None, False, 0, s.net.transcript, aborted=err.cause,
                          detail={"error_rate": err.error_rate})
