"""Qubit efficiency eta = c / (q + b) as exact rationals.

``q`` counts qubits prepared for the protocol (including decoys), ``b`` the
classical bits exchanged outside eavesdropping checks, ``c = 1`` the bit of
veto outcome. ``qubit_efficiency`` builds q and b term by term from each
protocol's transmission schedule; ``table_formula`` evaluates the compact
row formula; ``counted_efficiency`` measures a ring protocol's transcript.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from ..errors import ConfigError
from ..primitives.decoys import DecoyConfig
from ..protocols.common import PROTOCOLS, ProtocolConfig, VoteVector

# the parameter assignments that give the published 4-voter column
PAPER_4VOTER = {
    "rkqav": dict(l=10, delta0=1, delta1=1),
    "wqav": dict(l=10, delta0=1, delta1=1),
    "qav1": dict(l=10, delta0=1, delta1=1),
    "qav2": dict(l=10, delta0=1, delta1=1),
    "qav3": dict(l=10, delta0=1, delta1=1),
    "qav4": dict(l=10, delta0=1, delta1=1),
    "qav5": dict(l=10, delta0=1, delta1=1),
    "qav6": dict(l=2, delta0=0, delta1=1),
    "qav7": dict(l=2, delta0=0, delta1=1, m=3),
}
PAPER_4VOTER_ETA = {
    "rkqav": Fraction(1, 200), "wqav": Fraction(1, 360), "qav1": Fraction(1, 280),
    "qav2": Fraction(1, 280), "qav3": Fraction(1, 280), "qav4": Fraction(1, 520),
    "qav5": Fraction(1, 280), "qav6": Fraction(1, 24), "qav7": Fraction(1, 24),
}


@dataclass(frozen=True)
class EfficiencyInputs:
    """``l``: key length, copies, iterations (qav6) or travel qubits (qav7)."""

    protocol: str
    n: int
    l: int
    delta0: Fraction = Fraction(0)
    delta1: Fraction = Fraction(0)
    m: int | None = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.n < 2 or self.l < 1:
            raise ConfigError(f"need n >= 2 and l >= 1, got n={self.n}, l={self.l}")
        object.__setattr__(self, "delta0", Fraction(self.delta0))
        object.__setattr__(self, "delta1", Fraction(self.delta1))
        if self.delta0 < 0 or self.delta1 < 0:
            raise ConfigError("security parameters must be nonnegative")
        if self.protocol == "qav7":
            if self.m is None:
                raise ConfigError("qav7 needs m")
            if self.m < self.n - 1 or not 1 <= self.l < self.m:
                raise ConfigError(f"qav7 needs m >= n-1 and 1 <= travel < m (n={self.n}, m={self.m}, l={self.l})")


@dataclass(frozen=True)
class EfficiencyReport:
    inputs: EfficiencyInputs
    q: Fraction
    b: Fraction
    c: int = 1

    @property
    def eta(self) -> Fraction:
        return Fraction(self.c) / (self.q + self.b)


def qubit_efficiency(inp: EfficiencyInputs) -> EfficiencyReport:
    """q and b summed over the protocol's transmissions."""
    n, l, d0, d1, p = inp.n, inp.l, inp.delta0, inp.delta1, inp.protocol
    pairs = comb(n, 2)
    if p == "rkqav":
        dealt = (1 + d0) * n * l           # GHZ particles, CA -> voters
        q = dealt + d1 * dealt + d1 * n * l  # their decoys, plus decoys on the nl returned
        b = 0
    elif p == "wqav":
        dealt = (1 + d0) * n * l
        q = 4 * n * l + dealt + d1 * dealt   # BB84 pads, GHZ particles, decoys
        b = n * l                            # masked reports
    elif p == "qav1":
        q, b = pairs * 4 * l, n * l          # BB84 key per pair, then the broadcast shares
    elif p in ("qav2", "qav5"):
        q, b = pairs * 2 * l * (d1 + 1), n * l
    elif p == "qav3":
        q, b = pairs * l * (d1 + 1), 4 * n * l
    elif p == "qav4":
        q, b = pairs * 8 * l, n * l
    elif p == "qav6":
        # per iteration: a fresh Bell pair, one half crossing n+1 hops with decoys
        q, b = 2 * l + (n + 1) * l * (1 + d1), 0
    else:
        q, b = inp.m + (n + 1) * l * (1 + d1), 1
    return EfficiencyReport(inp, Fraction(q), Fraction(b))


def table_formula(inp: EfficiencyInputs) -> Fraction:
    """The compact eta expression of each table row."""
    n, l, d0, d1, p = inp.n, inp.l, inp.delta0, inp.delta1, inp.protocol
    if p == "rkqav":
        inv = n * l * (1 + d0 + 2 * d1 + d0 * d1)
    elif p == "wqav":
        inv = n * l * (6 + d0 + d1 + d0 * d1)
    elif p == "qav1":
        inv = (2 * n - 1) * n * l
    elif p in ("qav2", "qav5"):
        inv = ((n - 1) * (d1 + 1) + 1) * n * l
    elif p == "qav3":
        inv = (Fraction((n - 1) * (d1 + 1), 2) + 4) * n * l
    elif p == "qav4":
        inv = n * l * (4 * n - 3)
    elif p == "qav6":
        inv = ((n + 1) * (1 + d1) + 2) * l
    else:
        inv = inp.m + (n + 1) * (1 + d1) * l + 1
    return 1 / Fraction(inv)


def paper_inputs(protocol: str, n: int = 4) -> EfficiencyInputs:
    return EfficiencyInputs(protocol, n, **PAPER_4VOTER[protocol])


def counted_efficiency(protocol: str, n: int, delta1: int = 1, seed: int = 0) -> EfficiencyReport:
    """q and b read off a noiseless consensus transcript of qav6 or qav7.

    q sums prepared qubits and every "travel" hop (payload plus decoys);
    b sums the bits of the final "result" broadcast. Authentication and
    decoy-check chatter are excluded. For qav6 l is the iteration count used.
    """
    from ..protocols import run_protocol

    if protocol not in ("qav6", "qav7"):
        raise ConfigError("transcript counting covers the ring protocols qav6 and qav7")
    cfg = ProtocolConfig(protocol, n, l=1, decoys=DecoyConfig(ratio=delta1) if delta1 else DecoyConfig(),
                         seed=seed).validate()
    out = run_protocol(cfg, VoteVector((0,) * n), np.random.default_rng(seed))
    recs = out.transcript.records
    prep = sum(r.qubits for r in recs if r.kind == "prepare")
    travel = sum(r.qubits + r.decoys for r in recs if r.kind == "travel")
    b = sum(r.bits for r in recs if r.kind == "result")
    l = out.iterations_used if protocol == "qav6" else cfg.travel
    inp = EfficiencyInputs(protocol, n, l, 0, delta1, cfg.m if protocol == "qav7" else None)
    return EfficiencyReport(inp, Fraction(prep + travel), Fraction(b))


def efficiency_table(n: int, l: int, delta0, delta1, ring_l: int = 2, m: int | None = None,
                     protocols=PROTOCOLS) -> list[EfficiencyReport]:
    """One report per protocol.

    The key-based and GHZ rows use ``l``; the ring rows use ``ring_l``
    (iterations for qav6, travel qubits for qav7) and qav7 uses
    ``m`` (default max(n-1, ring_l+1)).
    """
    out = []
    for p in protocols:
        if p in ("qav6", "qav7"):
            mm = None if p == "qav6" else (m if m is not None else max(n - 1, ring_l + 1))
            inp = EfficiencyInputs(p, n, ring_l, 0, delta1, mm)
        else:
            inp = EfficiencyInputs(p, n, l, delta0, delta1)
        out.append(qubit_efficiency(inp))
    return out
