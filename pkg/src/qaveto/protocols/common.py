"""Configuration, vote vectors and run outcomes shared by every protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from ..adversary.attacks import Attack
from ..errors import ConfigError
from ..network import Transcript
from ..primitives.decoys import DecoyConfig
from ..primitives.keys import KEY_METHODS
from ..qsim.channels import KrausChannel

PROTOCOLS = ("rkqav", "wqav", "qav1", "qav2", "qav3", "qav4", "qav5", "qav6", "qav7")
XOR_FAMILY = ("qav1", "qav2", "qav3", "qav4", "qav5")
PROBABILISTIC = ("wqav",) + XOR_FAMILY
ITERATIVE = ("rkqav", "qav6")
QAV7_STATES = ("bell", "ghz", "cluster4")

# QAV-3 and QAV-4 are QAV-1 with the key method fixed
FIXED_KEY_METHOD = {"qav3": "orthogonal_qka", "qav4": "semiquantum_mediated"}


@dataclass(frozen=True)
class VoteVector:
    """Private inputs w_i; 1 means veto."""

    w: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.w)
        if not w:
            raise ConfigError("a vote vector needs at least one voter")
        if any(x not in (0, 1) for x in w):
            raise ConfigError(f"votes must be 0 or 1, got {self.w}")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def k(self) -> int:
        return sum(self.w)

    @classmethod
    def parse(cls, text: str) -> "VoteVector":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ConfigError(f"votes must be a bitstring like 0110, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def with_vetoes(cls, n: int, k: int, rng: np.random.Generator) -> "VoteVector":
        """``k`` vetoes at uniformly random positions."""
        if not 0 <= k <= n:
            raise ConfigError(f"veto count must lie in [0, {n}], got {k}")
        w = np.zeros(n, dtype=int)
        w[rng.choice(n, size=k, replace=False)] = 1
        return cls(tuple(w))

    def vetoers(self) -> list[int]:
        return [i for i, x in enumerate(self.w) if x]

    def __str__(self):
        return "".join(map(str, self.w))


def veto_or(votes: VoteVector) -> int:
    """Reference result: 0 iff nobody vetoes."""
    return int(votes.k > 0)


def v2(k: int) -> int:
    """2-adic valuation of a positive integer."""
    if k < 1:
        raise ValueError("v2 is defined for positive integers")
    return (k & -k).bit_length() - 1


def max_iterations(n: int) -> int:
    """1 + floor(log2 n): rounds needed to rule out every even k <= n."""
    if n < 1:
        raise ValueError("need at least one voter")
    return 1 + int(math.floor(math.log2(n)))


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str
    n: int
    l: int = 10
    key_method: str | None = None
    noise: KrausChannel | None = None
    decoys: DecoyConfig = field(default_factory=DecoyConfig)
    delta0: float = 0.0
    m: int | None = None
    travel: int | None = None
    state_kind: str | None = None
    attack: Attack | None = None
    qds: bool = False
    qds_length: int = 64
    qds_threshold: float = 0.1
    seed: int = 0

    def validate(self) -> "ProtocolConfig":
        """Check protocol-specific constraints; returns a copy with defaults filled in."""
        p = self.protocol
        if p not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {p!r}; choose one of {', '.join(PROTOCOLS)}")
        if self.n < 1:
            raise ConfigError(f"need at least one voter, got n={self.n}")
        if self.l < 1:
            raise ConfigError(f"l must be at least 1, got {self.l}")
        if self.delta0 < 0:
            raise ConfigError(f"delta0 must be non-negative, got {self.delta0}")
        if self.qds_length < 1 or not 0 <= self.qds_threshold <= 1:
            raise ConfigError("qds_length must be >= 1 and qds_threshold in [0, 1]")
        cfg = self
        if p in XOR_FAMILY:
            if self.n < 2:
                raise ConfigError(f"{p} needs at least two voters to share pairwise keys")
            method = FIXED_KEY_METHOD.get(p)
            if p == "qav1":
                method = self.key_method or "bb84_qkd"
            elif p in ("qav2", "qav5"):
                method = "shared_bell"
            if self.key_method is not None and self.key_method != method:
                raise ConfigError(f"{p} uses key method {method}, not {self.key_method}")
            if method not in KEY_METHODS:
                raise ConfigError(f"unknown key method {method!r}; choose one of {', '.join(KEY_METHODS)}")
            cfg = replace(cfg, key_method=method)
        elif self.key_method is not None:
            raise ConfigError(f"{p} does not take a key method")
        if p in ("rkqav", "wqav") and self.n < 2:
            raise ConfigError(f"{p} needs n >= 2 for a GHZ state")
        if p == "rkqav" and self.l < max_iterations(self.n):
            raise ConfigError(
                f"rkqav with n={self.n} needs l >= {max_iterations(self.n)} GHZ copies, got {self.l}"
            )
        if p == "qav7":
            cfg = _validate_qav7(cfg)
        elif any(v is not None for v in (self.m, self.travel, self.state_kind)):
            raise ConfigError(f"m, travel and state_kind only apply to qav7, not {p}")
        return cfg

    @property
    def iteration_cap(self) -> int:
        if self.protocol in ITERATIVE:
            return max_iterations(self.n)
        if self.protocol == "qav5":
            return self.l
        return 1


# (n, state) -> (m, travel) for the built-in operation tables
_QAV7_DEFAULT_SHAPE = {(3, "bell"): (2, 1), (3, "ghz"): (3, 1), (4, "ghz"): (3, 2), (4, "cluster4"): (4, 2)}


def _validate_qav7(cfg: ProtocolConfig) -> ProtocolConfig:
    n = cfg.n
    kind = cfg.state_kind or ("bell" if n == 3 else "ghz")
    if kind not in QAV7_STATES:
        raise ConfigError(f"qav7 state must be one of {', '.join(QAV7_STATES)}, got {kind!r}")
    size = {"bell": 2, "cluster4": 4}.get(kind)
    m_def, t_def = _QAV7_DEFAULT_SHAPE.get((n, kind), (size or max(n - 1, 2), None))
    m = cfg.m if cfg.m is not None else m_def
    travel = cfg.travel if cfg.travel is not None else (t_def or m - 1)
    if m < n - 1:
        raise ConfigError(f"qav7 needs m >= n-1 = {n - 1}, got m={m}")
    if size is not None and m != size:
        raise ConfigError(f"a {kind} state has {size} qubits, got m={m}")
    if not 1 <= travel < m:
        raise ConfigError(f"qav7 travel qubit count must satisfy 1 <= travel < m={m}, got {travel}")
    return replace(cfg, m=m, travel=travel, state_kind=kind)


@dataclass
class RunOutcome:
    """Result of one protocol run.

    ``result`` is V_n (or the CA bit C_n for qav7) and is None when the run
    aborted. ``confidence`` is the probability that ``result`` is right given
    the protocol's own guarantee (1 for deterministic outcomes).
    """

    protocol: str
    result: int | None
    conclusive: bool
    iterations_used: int
    transcript: Transcript
    aborted: str | None = None
    confidence: float = 1.0
    voter_views: dict[str, int] = field(default_factory=dict)
    detail: dict[str, Any] = field(default_factory=dict)

    def verdict(self) -> str:
        if self.aborted is not None:
            return f"ABORTED({self.aborted})"
        return "VETO" if self.result == 1 else "CONSENSUS"


VotePolicy = Callable[[int], VoteVector]


def fixed_policy(votes: VoteVector) -> VotePolicy:
    return lambda iteration: votes


def switching_policy(schedule: Sequence[VoteVector]) -> VotePolicy:
    """Dishonest harness policy: round t uses ``schedule[t]`` (last entry repeats).

    Lets a voter change its vote between iterations, which an iterative
    protocol cannot prevent.
    """
    schedule = list(schedule)
    if not schedule:
        raise ConfigError("switching policy needs at least one vote vector")
    n = schedule[0].n
    if any(v.n != n for v in schedule):
        raise ConfigError("all vote vectors in a schedule must have the same length")
    return lambda t: schedule[min(t, len(schedule) - 1)]
