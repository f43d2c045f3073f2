"""Monte-Carlo success probability and exhaustive iteration profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from ..protocols import run_protocol
from ..protocols.batch import simulate_batch
from ..protocols.common import ITERATIVE, PROBABILISTIC, ProtocolConfig, VoteVector, max_iterations

ENGINES = ("batch", "state")


@dataclass(frozen=True)
class SuccessEstimate:
    protocol: str
    n: int
    k: int
    l: int
    trials: int
    successes: int
    expected: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        """Binomial standard error under the expected probability."""
        p = self.expected
        return math.sqrt(p * (1 - p) / self.trials)

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        """Wilson score interval for the empirical rate."""
        n, p = self.trials, self.rate
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)

    def within(self, sigmas: float = 4.0) -> bool:
        if self.sigma == 0:
            return self.rate == self.expected
        return abs(self.rate - self.expected) <= sigmas * self.sigma


def success_probability_experiment(cfg: ProtocolConfig, k: int, trials: int, rng: np.random.Generator,
                                   engine: str = "batch") -> SuccessEstimate:
    """Fraction of runs reporting a veto when k of n voters veto (vetoers placed at random)."""
    cfg = cfg.validate()
    if cfg.protocol not in PROBABILISTIC:
        raise ConfigError(f"success probability is defined for {', '.join(PROBABILISTIC)}")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if not 0 <= k <= cfg.n:
        raise ConfigError(f"k must lie in [0, {cfg.n}], got {k}")
    expected = 0.0 if k == 0 else 1 - 2.0**-cfg.l
    if engine == "batch":
        votes = VoteVector.with_vetoes(cfg.n, k, rng)
        res = simulate_batch(cfg, votes, trials, rng)
        hits = int(res.results.sum())
    elif engine == "state":
        hits = 0
        for _ in range(trials):
            votes = VoteVector.with_vetoes(cfg.n, k, rng)
            out = run_protocol(cfg, votes, np.random.default_rng(rng.integers(2**63)))
            hits += int(out.result == 1)
    else:
        raise ConfigError(f"engine must be one of {', '.join(ENGINES)}")
    return SuccessEstimate(cfg.protocol, cfg.n, k, cfg.l, trials, hits, expected)


def iteration_profile(protocol: str, n: int, seed: int = 0) -> dict[int, int]:
    """k -> iterations used, from one noiseless run per k (vetoers first)."""
    if protocol not in ITERATIVE:
        raise ConfigError(f"iteration profiles cover {', '.join(ITERATIVE)}")
    if not 2 <= n <= 16:
        raise ConfigError(f"n must lie in [2, 16], got {n}")
    cfg = ProtocolConfig(protocol, n, l=max_iterations(n), seed=seed)
    profile = {}
    for k in range(n + 1):
        votes = VoteVector(tuple([1] * k + [0] * (n - k)))
        out = run_protocol(replace(cfg), votes, np.random.default_rng([seed, k]))
        if out.aborted or out.result != int(k > 0):
            raise ConfigError(f"noiseless {protocol} run gave {out.verdict()} for k={k}")
        profile[k] = out.iterations_used
    return profile
