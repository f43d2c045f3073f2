"""Vectorized Monte-Carlo engine for the probabilistic protocols.

A full state-machine run costs milliseconds, too slow for 10^5 trials per
configuration. Here every per-position quantity is drawn from an outcome
kernel that is computed exactly from the density operator of the relevant
few-qubit circuit (noise included), and the classical post-processing is
done on whole arrays at once:

* WQAV: for every flip pattern of the GHZ copy, the distribution of the n
  measured bits after H;
* QAV-2 / QAV-5: for every flip pair on a shared Bell pair, the joint
  distribution of the two measured bits;
* key-based variants: the joint distribution of the two endpoints' key bits
  (two-bit blocks for the orthogonal-state key agreement).

The engine models attack-free runs only; security checks never fire there
in the noiseless case and are not simulated.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..primitives.keys import DENSE_CODE
from ..qsim import bb84_state, hadamard, prepare_state
from ..qsim.batch import sample_categorical
from ..qsim.channels import KrausChannel, apply_channel, conjugate, density_probabilities
from .common import PROBABILISTIC, ProtocolConfig, VoteVector

_H = hadamard().matrix
_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass
class BatchResult:
    """``views[t, i, j]`` is voter i's public bit for position j in trial t:
    the masked report Y_i for WQAV, the broadcast share V^i otherwise."""

    protocol: str
    votes: VoteVector
    results: np.ndarray
    iterations: np.ndarray
    views: np.ndarray
    parity: np.ndarray

    @property
    def trials(self) -> int:
        return int(self.results.size)

    @property
    def rate(self) -> float:
        return float(self.results.mean())


def _noisy(rho, channel: KrausChannel | None, targets):
    if channel is None or channel.is_identity:
        return rho
    return apply_channel(rho, channel, targets)


def _key(channel: KrausChannel | None):
    return None if channel is None or channel.is_identity else (channel.kind, channel.damping)


@functools.lru_cache(maxsize=64)
def _ghz_kernel_cached(n: int, key, channel_obj) -> np.ndarray:
    rho0 = _noisy(prepare_state("ghz", n).density(), channel_obj, range(n))
    table = np.zeros((2**n, 2**n))
    for idx, flips in enumerate(itertools.product((0, 1), repeat=n)):
        op = functools.reduce(np.kron, [_H @ (_Z if f else np.eye(2)) for f in flips])
        table[idx] = density_probabilities(conjugate(rho0, op, range(n)), "computational", range(n))
    return table


def ghz_kernel(n: int, channel: KrausChannel | None = None) -> np.ndarray:
    """Row = flip pattern (big-endian), column = measured bits after H, one hop of noise."""
    return _ghz_kernel_cached(n, _key(channel), channel)


@functools.lru_cache(maxsize=64)
def _pair_kernel_cached(key, channel_obj) -> np.ndarray:
    rho0 = _noisy(prepare_state("bell").density(), channel_obj, [0, 1])
    table = np.zeros((4, 4))
    for idx, (fa, fb) in enumerate(itertools.product((0, 1), repeat=2)):
        op = np.kron(_H @ (_Z if fa else np.eye(2)), _H @ (_Z if fb else np.eye(2)))
        table[idx] = density_probabilities(conjugate(rho0, op, [0, 1]), "computational", [0, 1])
    return table


def pair_kernel(channel: KrausChannel | None = None) -> np.ndarray:
    """Row = (flip a, flip b), column = (bit a, bit b) for a shared phi+ after H on both."""
    return _pair_kernel_cached(_key(channel), channel)


@functools.lru_cache(maxsize=64)
def _key_kernel_cached(method: str, key, channel_obj) -> np.ndarray:
    if method == "bb84_qkd":
        out = np.zeros(4)
        for label, x in (("0", 0), ("1", 1), ("+", 0), ("-", 1)):
            rho = _noisy(bb84_state(label).density(), channel_obj, [0])
            if label in "+-":
                rho = conjugate(rho, _H, [0])
            p = density_probabilities(rho, "computational", [0])
            out[2 * x:2 * x + 2] += p / 4
        return out[None, :]
    if method == "shared_bell":
        return pair_kernel(channel_obj)[:1]
    if method == "semiquantum_mediated":
        rho = _noisy(prepare_state("bell").density(), channel_obj, [0, 1])
        return density_probabilities(rho, "computational", [0, 1])[None, :]
    if method == "orthogonal_qka":
        # row = b's two key bits, column = the two bits a decodes
        table = np.zeros((4, 4))
        for idx, bits in enumerate(itertools.product((0, 1), repeat=2)):
            rho = _noisy(prepare_state("bell").density(), channel_obj, [1])
            rho = conjugate(rho, DENSE_CODE[bits], [1])
            rho = _noisy(rho, channel_obj, [1])
            table[idx] = density_probabilities(rho, "bell", [0, 1])
        return table
    raise ConfigError(f"unknown key method {method!r}")


def key_kernel(method: str, channel: KrausChannel | None = None) -> np.ndarray:
    """Joint law of the two endpoints' key bits (see module docstring)."""
    return _key_kernel_cached(method, _key(channel), channel)


def _bits_of(index: np.ndarray, width: int) -> np.ndarray:
    """Big-endian bits of ``index`` along a new last axis."""
    shifts = np.arange(width - 1, -1, -1)
    return (index[..., None] >> shifts) & 1


def _pair_keys(method, channel, trials, l, rng) -> tuple[np.ndarray, np.ndarray]:
    """Key bits held by the two endpoints of one pair, shape (trials, l) each."""
    table = key_kernel(method, channel)
    if method != "orthogonal_qka":
        out = sample_categorical(table, np.zeros((trials, l), dtype=int), rng)
        bits = _bits_of(out, 2)
        return bits[..., 0], bits[..., 1]
    blocks = -(-l // 2)
    k_ab = rng.integers(0, 2, size=(trials, 2 * blocks))
    k_ba = rng.integers(0, 2, size=(trials, 2 * blocks))
    if l % 2:
        k_ba[:, -1] = 0
    sent = 2 * k_ba[:, 0::2] + k_ba[:, 1::2]
    decoded = _bits_of(sample_categorical(table, sent, rng), 2).reshape(trials, 2 * blocks)
    return (k_ab ^ decoded)[:, :l], (k_ab ^ k_ba)[:, :l]


def simulate_batch(cfg: ProtocolConfig, votes: VoteVector, trials: int, rng: np.random.Generator) -> BatchResult:
    """``trials`` independent attack-free runs of a probabilistic protocol."""
    cfg = cfg.validate()
    if cfg.protocol not in PROBABILISTIC:
        raise ConfigError(f"the batch engine covers {', '.join(PROBABILISTIC)}, not {cfg.protocol}")
    if cfg.attack is not None:
        raise ConfigError("the batch engine does not model attacks; use the state-machine runs")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if votes.n != cfg.n:
        raise ConfigError(f"config has n={cfg.n} voters but {votes.n} votes were given")
    n, l, ch = cfg.n, cfg.l, cfg.noise
    w = np.array(votes.w, dtype=int)
    p = cfg.protocol

    if p == "wqav":
        flips = (rng.random((trials, l, n)) < 0.5) & (w == 1)
        pattern = (flips.astype(int) << np.arange(n - 1, -1, -1)).sum(axis=-1)
        bits = _bits_of(sample_categorical(ghz_kernel(n, ch), pattern, rng), n)  # (trials, l, n)
        pads = rng.integers(0, 2, size=(trials, n, l))
        views = np.transpose(bits, (0, 2, 1)) ^ pads
        parity = np.bitwise_xor.reduce(views ^ pads, axis=1)
    else:
        share = np.zeros((trials, n, l), dtype=int)
        for i, j in itertools.combinations(range(n), 2):
            if p in ("qav2", "qav5"):
                fi = (rng.random((trials, l)) < 0.5) & bool(w[i])
                fj = (rng.random((trials, l)) < 0.5) & bool(w[j])
                out = sample_categorical(pair_kernel(ch), 2 * fi.astype(int) + fj, rng)
                bits = _bits_of(out, 2)
                a, b = bits[..., 0], bits[..., 1]
            else:
                a, b = _pair_keys(cfg.key_method, ch, trials, l, rng)
            share[:, i] ^= a
            share[:, j] ^= b
        if p not in ("qav2", "qav5"):
            share ^= (rng.random((trials, n, l)) < 0.5) & (w == 1)[None, :, None]
        views = share
        parity = np.bitwise_xor.reduce(share, axis=1)

    hit = parity.astype(bool)
    results = hit.any(axis=1)
    if p == "qav5":
        iterations = np.where(results, hit.argmax(axis=1) + 1, l)
    else:
        iterations = np.ones(trials, dtype=int)
    return BatchResult(p, votes, results.astype(int), iterations, views.astype(np.int8), parity.astype(np.int8))
