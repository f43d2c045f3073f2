"""Average fidelity of the transmitted states under travel noise.

Each protocol has a transmission schedule: a list of equiprobable encodings,
each a sequence of steps ``("noise", targets)`` (one channel application per
listed qubit, i.e. one hop) or ``("op", matrix, targets)`` (a party's
encoding). The numeric route evolves the density operator through every
encoding and averages ``<target|rho|target>`` against the noiseless result;
the closed-form route evaluates the published polynomials.

Per-copy values are computed for l = 1. Copies are independent, so l copies
give the per-copy value to the power l.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigError
from ..primitives.keys import DENSE_CODE
from ..qsim import (
    StateVector,
    apply_channel,
    bb84_state,
    conjugate,
    fidelity,
    make_channel,
    prepare_state,
    sample_kraus,
)
from ..qsim.states import apply_matrix
from ..protocols.subgroups import operation_table, resource_state

FIDELITY_PROTOCOLS = ("qav1", "qav2", "qav3", "qav4", "qav5", "qav6", "qav7")
CHANNELS = ("amplitude", "phase")
METHODS = ("exact_enumeration", "monte_carlo")
_Z = np.diag([1.0, -1.0]).astype(complex)
_I = np.eye(2, dtype=complex)


def _ring_encodings(psi: StateVector, travel: list[int], ops: Sequence[np.ndarray]):
    """All 2^n vote patterns: n+1 hops of the travel qubits, voter i applies ops[i] if vetoing."""
    n = len(ops)
    out = []
    for w in itertools.product((0, 1), repeat=n):
        steps = [("noise", travel)]
        for i in range(n):
            if w[i]:
                steps.append(("op", ops[i], travel))
            steps.append(("noise", travel))
        out.append((psi, steps))
    return out


def schedule(protocol: str, n: int = 4):
    """Equiprobable (initial state, steps) pairs for one copy of ``protocol``."""
    bell = prepare_state("bell")
    if protocol == "qav1":
        # one BB84 key qubit crossing one hop
        return [(bb84_state(x), [("noise", [0])]) for x in ("0", "1", "+", "-")]
    if protocol in ("qav2", "qav4", "qav5"):
        # both halves of a shared Bell pair travel one hop, then each side may apply Z
        return [
            (bell, [("noise", [0, 1]), ("op", np.kron(_Z if a else _I, _Z if b else _I), [0, 1])])
            for a, b in itertools.product((0, 1), repeat=2)
        ]
    if protocol == "qav3":
        # one half goes out, is dense-coded with two key bits, and comes back
        return [(bell, [("noise", [1]), ("op", DENSE_CODE[bits].matrix, [1]), ("noise", [1])])
                for bits in itertools.product((0, 1), repeat=2)]
    if protocol == "qav6":
        return _ring_encodings(bell, [1], [_Z] * n)
    if protocol == "qav7":
        table = operation_table(n, "bell" if n == 3 else "ghz")
        psi = resource_state(table.state_kind, table.m)
        return _ring_encodings(psi, table.travel_targets(), [op.matrix for op in table.ops])
    raise ConfigError(f"no transmission schedule for {protocol!r}; choose one of {', '.join(FIDELITY_PROTOCOLS)}")


def _target(psi: StateVector, steps) -> StateVector:
    amp = psi.amplitudes
    for step in steps:
        if step[0] == "op":
            amp = apply_matrix(amp, step[1], step[2])
    return StateVector(amp)


def _check(channel: str, eta: float) -> None:
    if channel not in CHANNELS:
        raise ConfigError(f"channel must be one of {', '.join(CHANNELS)}, got {channel!r}")
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")


def average_fidelity_numeric(protocol: str, channel: str, eta: float, n: int = 4, l: int = 1) -> float:
    """Exact average over the schedule's encodings, via density operators."""
    _check(channel, eta)
    ch = make_channel(channel, eta)
    total, encodings = 0.0, schedule(protocol, n)
    for psi, steps in encodings:
        rho = psi.density()
        for step in steps:
            rho = apply_channel(rho, ch, step[1]) if step[0] == "noise" else conjugate(rho, step[1], step[2])
        total += fidelity(rho, _target(psi, steps))
    return (total / len(encodings)) ** _copies(protocol, l)


def average_fidelity_monte_carlo(protocol: str, channel: str, eta: float, trials: int,
                                 rng: np.random.Generator, n: int = 4, l: int = 1) -> float:
    """Quantum-trajectory estimate of the same average (statistical, per copy to the power l)."""
    _check(channel, eta)
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    ch = make_channel(channel, eta)
    encodings = schedule(protocol, n)
    total = 0.0
    for _ in range(trials):
        psi, steps = encodings[int(rng.integers(len(encodings)))]
        state = psi
        for step in steps:
            if step[0] == "noise":
                for q in step[1]:
                    state, _ = sample_kraus(state, ch, q, rng)
            else:
                state = StateVector(apply_matrix(state.amplitudes, step[1], step[2]))
        total += abs(np.vdot(_target(psi, steps).amplitudes, state.amplitudes)) ** 2
    return (total / trials) ** _copies(protocol, l)


def _copies(protocol: str, l: int) -> int:
    if l < 1:
        raise ConfigError(f"l must be at least 1, got {l}")
    if protocol in ("qav6", "qav7"):
        if l != 1:
            raise ConfigError(f"{protocol} fidelity is per pass; l must be 1")
        return 1
    # the orthogonal-state key agreement carries two key bits per Bell pair
    return math.ceil(l / 2) if protocol == "qav3" else l


def fidelity_closed_form(protocol: str, channel: str, eta: float, l: int = 1, n: int = 4) -> float:
    """The published average-fidelity expressions."""
    _check(channel, eta)
    if l < 1:
        raise ConfigError(f"l must be at least 1, got {l}")
    e, r = eta, math.sqrt(1 - eta)
    ad = channel == "amplitude"
    if protocol == "qav1":
        return ((r - e + 3) / 4) ** l if ad else ((r + 3) / 4) ** l
    if protocol in ("qav2", "qav4", "qav5"):
        return (1 + (e - 2) * e / 2) ** l if ad else (1 - e / 2) ** l
    if protocol == "qav3":
        if ad:
            return (1 - e / 2) ** l
        if l % 2:
            raise ConfigError("the qav3 phase-damping formula is stated for even l only")
        return (1 - e / 2) ** (l // 2)
    if protocol in ("qav6", "qav7"):
        if n != 4 or l != 1:
            raise ConfigError(f"the {protocol} polynomial is stated for n=4 voters and one pass")
        if protocol == "qav6" and ad:
            return (-e**5 / 4 + 5 * e**4 / 4 - 5 * e**3 / 2 + r * e**2 / 2 + 5 * e**2 / 2
                    - r * e - 5 * e / 4 + r / 2 + 1 / 2)
        if protocol == "qav6":
            return r * e**2 / 2 - r * e + r / 2 + 1 / 2
        if ad:
            return (e**10 / 4 - 19 * e**9 / 8 + 10 * e**8 - 197 * e**7 / 8 + 315 * e**6 / 8
                    - 349 * e**5 / 8 + 289 * e**4 / 8 - 195 * e**3 / 8 + 107 * e**2 / 8 - 5 * e + 1)
        return -e**5 / 2 + 5 * e**4 / 2 - 5 * e**3 + 5 * e**2 - 5 * e / 2 + 1
    raise ConfigError(f"no closed form for {protocol!r}")


@dataclass(frozen=True)
class NoiseSweep:
    protocol: str
    channel: str
    etas: tuple[float, ...]
    n: int = 4
    l: int = 1
    method: str = "exact_enumeration"
    trials: int = 0

    def __post_init__(self):
        if any(not 0.0 <= e <= 1.0 for e in self.etas):
            raise ConfigError("every eta in the grid must lie in [0, 1]")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        if self.method == "monte_carlo" and self.trials < 1:
            raise ConfigError("monte_carlo sweeps need trials >= 1")


@dataclass(frozen=True)
class FidelityRow:
    protocol: str
    channel: str
    eta: float
    closed_form: float | None
    numeric: float

    @property
    def abs_diff(self) -> float | None:
        return None if self.closed_form is None else abs(self.closed_form - self.numeric)


def eta_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive grid, rounded to 12 digits so 0.1-steps print cleanly."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def noise_sweep(sweep: NoiseSweep, rng: np.random.Generator | None = None) -> list[FidelityRow]:
    rows = []
    for eta in sweep.etas:
        if sweep.method == "exact_enumeration":
            num = average_fidelity_numeric(sweep.protocol, sweep.channel, eta, sweep.n, sweep.l)
        else:
            if rng is None:
                raise ConfigError("monte_carlo sweeps need an rng")
            num = average_fidelity_monte_carlo(sweep.protocol, sweep.channel, eta, sweep.trials, rng,
                                               sweep.n, sweep.l)
        try:
            closed = fidelity_closed_form(sweep.protocol, sweep.channel, eta, sweep.l, sweep.n)
        except ConfigError:
            closed = None
        rows.append(FidelityRow(sweep.protocol, sweep.channel, eta, closed, num))
    return rows


@dataclass(frozen=True)
class TradeoffRow:
    l: int
    correctness: float
    fidelity: float


def robustness_vs_correctness_tradeoff(protocol: str, channel: str, eta: float,
                                       ls: Sequence[int]) -> list[TradeoffRow]:
    """Per l: success probability 1 - 2^-l against the closed-form fidelity."""
    if protocol not in ("qav1", "qav2", "qav3", "qav4", "qav5"):
        raise ConfigError(f"{protocol!r} is not a probabilistic protocol with a fidelity formula")
    rows = []
    for l in ls:
        if l < 1:
            raise ConfigError(f"l must be at least 1, got {l}")
        rows.append(TradeoffRow(l, 1 - 2.0**-l, fidelity_closed_form(protocol, channel, eta, l)))
    return rows
