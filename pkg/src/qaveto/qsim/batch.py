"""Vectorized evolution of many independent copies of a small register.

Each row of a ``(trials, 2**n)`` array is one register. Used by Monte-Carlo
experiments that need 10^5+ repetitions of a few-qubit circuit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .states import StateVector


def replicate(state: StateVector, trials: int) -> np.ndarray:
    return np.tile(state.amplitudes, (trials, 1)).astype(complex)


def batch_apply(states: np.ndarray, matrix: np.ndarray, targets: Sequence[int], mask=None) -> np.ndarray:
    """Apply ``matrix`` to ``targets`` of every row (or only rows where ``mask``)."""
    trials, dim = states.shape
    n = dim.bit_length() - 1
    k = len(targets)
    psi = states.reshape((trials,) + (2,) * n)
    op = np.asarray(matrix).reshape((2,) * (2 * k))
    axes = [t + 1 for t in targets]
    out = np.tensordot(psi, op, axes=(axes, list(range(k, 2 * k))))
    # tensordot appends new target axes at the end
    out = np.moveaxis(out, list(range(n + 1 - k, n + 1)), axes).reshape(trials, dim)
    if mask is None:
        return out
    return np.where(np.asarray(mask)[:, None], out, states)


def batch_measure(
    states: np.ndarray, basis: np.ndarray, targets: Sequence[int], rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Born-rule measurement of ``targets`` of every row in the column basis ``basis``.

    Returns (outcomes, collapsed states).
    """
    trials, dim = states.shape
    n = dim.bit_length() - 1
    targets = list(targets)
    rest = [q for q in range(n) if q not in targets]
    kdim = 2 ** len(targets)
    psi = states.reshape((trials,) + (2,) * n).transpose([0] + [t + 1 for t in targets] + [r + 1 for r in rest])
    psi = psi.reshape(trials, kdim, -1)
    comps = np.einsum("ji,tjr->tir", basis.conj(), psi)
    probs = np.sum(np.abs(comps) ** 2, axis=2)
    probs /= probs.sum(axis=1, keepdims=True)
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(trials)[:, None]
    outcomes = np.minimum((u > cdf).sum(axis=1), kdim - 1)
    picked = comps[np.arange(trials), outcomes] / np.sqrt(probs[np.arange(trials), outcomes])[:, None]
    joint = np.einsum("tj,tr->tjr", basis[:, outcomes].T, picked)
    joint = joint.reshape((trials,) + (2,) * n)
    order = targets + rest
    inv = np.argsort(order)
    post = joint.transpose([0] + [i + 1 for i in inv]).reshape(trials, dim)
    return outcomes, post


def sample_categorical(probs: np.ndarray, index: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one outcome per entry of ``index`` from the row ``probs[index]``."""
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(index.shape)
    rows = cdf[index]
    return (u[..., None] > rows).sum(axis=-1)
