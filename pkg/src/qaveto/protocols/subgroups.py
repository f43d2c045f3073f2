"""Dense-coding operation tables for the deterministic ring protocol.

Voter i vetoes by applying O_i to the travel qubits. A table is valid when
the O_i are distinct non-identity Pauli words (up to phase), each squares to
the identity up to phase, their full product is the identity up to phase,
and every nonempty proper sub-product maps the resource state to an
orthogonal state. Travel qubits are the last ``travel`` qubits of the state.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InvariantViolation
from ..qsim import ALGEBRA_TOL, OVERLAP_TOL, StateVector, Unitary, build_pauli_word, identity, prepare_state
from ..qsim.states import apply_matrix

BUILTIN_TABLES: dict[tuple[int, str], tuple[int, int, tuple[tuple[str, ...], ...]]] = {
    # (n, state): (m, travel, words)
    (3, "bell"): (2, 1, (("X",), ("iY",), ("Z",))),
    (3, "ghz"): (3, 1, (("X",), ("iY",), ("Z",))),
    (4, "ghz"): (3, 2, (("X", "I"), ("iX", "X"), ("iY", "X"), ("iY", "I"))),
    (4, "cluster4"): (4, 2, (("X", "iY"), ("X", "Z"), ("iY", "Z"), ("iY", "iY"))),
}

# (x, z) bits -> symbol; iY is real so products stay real up to a sign
_SYMBOL = {(0, 0): "I", (1, 0): "X", (1, 1): "iY", (0, 1): "Z"}


def resource_state(kind: str, m: int) -> StateVector:
    if kind == "bell":
        return prepare_state("bell")
    if kind == "cluster4":
        return prepare_state("cluster4")
    return prepare_state("ghz", m)


@dataclass(frozen=True)
class SubgroupAssignment:
    """Per-voter veto operations acting on the travel qubits.

    ``group_order`` is 2**m for the m-qubit resource state.
    """

    words: tuple[tuple[str, ...], ...]
    m: int
    travel: int
    state_kind: str

    @property
    def n(self) -> int:
        return len(self.words)

    @property
    def group_order(self) -> int:
        return 2**self.m

    @functools.cached_property
    def ops(self) -> tuple[Unitary, ...]:
        return tuple(build_pauli_word(w) for w in self.words)

    def travel_targets(self) -> list[int]:
        return list(range(self.m - self.travel, self.m))

    def subset_product(self, subset) -> Unitary:
        """Product of the ops for the voters in ``subset``, applied in ring order."""
        u = identity(self.travel)
        for i in sorted(subset):
            u = self.ops[i] @ u
        return u

    def check(self) -> None:
        """Raise ``InvariantViolation`` unless every table invariant holds."""
        ops = self.ops
        for i, o in enumerate(ops):
            if o.arity != self.travel:
                raise InvariantViolation(f"O_{i} acts on {o.arity} qubits, expected {self.travel}")
            if o.is_identity_up_to_phase():
                raise InvariantViolation(f"O_{i} is the identity")
            if not (o @ o).is_identity_up_to_phase():
                raise InvariantViolation(f"O_{i} is not an involution up to phase")
        for i, j in itertools.combinations(range(len(ops)), 2):
            if ops[i].equals_up_to_phase(ops[j]):
                raise InvariantViolation(f"O_{i} and O_{j} coincide, so g_{i} and g_{j} intersect beyond I")
        if not self.subset_product(range(self.n)).is_identity_up_to_phase():
            raise InvariantViolation("the product of all operations is not the identity")
        psi = resource_state(self.state_kind, self.m)
        for r in range(1, self.n):
            for subset in itertools.combinations(range(self.n), r):
                amp = apply_matrix(psi.amplitudes, self.subset_product(subset).matrix, self.travel_targets())
                if abs(np.vdot(psi.amplitudes, amp)) ** 2 > OVERLAP_TOL:
                    raise InvariantViolation(f"voters {subset} vetoing leave the state non-orthogonal")

    def permuted(self, order) -> "SubgroupAssignment":
        return SubgroupAssignment(tuple(self.words[i] for i in order), self.m, self.travel, self.state_kind)


# largest resource state the table search will try
SEARCH_MAX_M = 8


def _expectation_nonzero(psi: StateVector, m: int, travel: int) -> set[tuple[int, ...]]:
    """Symplectic vectors (x bits + z bits) of travel Paulis with nonzero expectation."""
    targets = list(range(m - travel, m))
    bad = set()
    for vec in itertools.product((0, 1), repeat=2 * travel):
        word = [_SYMBOL[(vec[q], vec[travel + q])] for q in range(travel)]
        amp = apply_matrix(psi.amplitudes, build_pauli_word(word).matrix, targets)
        if abs(np.vdot(psi.amplitudes, amp)) > ALGEBRA_TOL:
            bad.add(vec)
    return bad


def search_table(n: int, kind: str, m: int, travel: int) -> SubgroupAssignment | None:
    """Exhaustive search for a valid table (first in lexicographic order), or None."""
    if n < 3:
        # O_0 O_1 = I would force O_1 = O_0
        return None
    psi = resource_state(kind, m)
    bad = _expectation_nonzero(psi, m, travel)
    vectors = [v for v in itertools.product((0, 1), repeat=2 * travel) if v not in bad]

    def xor(a, b):
        return tuple(x ^ y for x, y in zip(a, b))

    def extend(chosen, sums, start):
        if len(chosen) == n - 1:
            return chosen
        for idx in range(start, len(vectors)):
            v = vectors[idx]
            new = [xor(s, v) for s in sums]
            if all(s not in bad for s in new):
                found = extend(chosen + [v], sums + new + [v], idx + 1)
                if found:
                    return found
        return None

    # sums holds every XOR of a nonempty subset of chosen (identity is in bad)
    zero = tuple([0] * (2 * travel))
    gens = extend([], [zero], 0)
    if gens is None:
        return None
    last = functools.reduce(xor, gens)
    words = tuple(tuple(_SYMBOL[(v[q], v[travel + q])] for q in range(travel)) for v in gens + [last])
    table = SubgroupAssignment(words, m, travel, kind)
    table.check()
    return table


def operation_table(n: int, kind: str, m: int | None = None, travel: int | None = None) -> SubgroupAssignment:
    """Unpermuted table for (n, state): the built-in row when the shape matches, else a search."""
    if (n, kind) in BUILTIN_TABLES:
        bm, bt, words = BUILTIN_TABLES[(n, kind)]
        if m in (None, bm) and travel in (None, bt):
            return SubgroupAssignment(words, bm, bt, kind)
    sizes = {"bell": [2], "cluster4": [4]}.get(kind, [m] if m is not None else list(range(max(2, n - 1), SEARCH_MAX_M + 1)))
    for mm in sizes:
        if mm is None or mm > SEARCH_MAX_M:
            continue
        # most travel qubits first: fewer constraints, so the search ends quickly
        for tt in ([travel] if travel is not None else range(mm - 1, 0, -1)):
            # n-1 independent generators need 2*travel >= n-1 symplectic dimensions
            if 1 <= tt < mm and 2 * tt >= n - 1:
                table = search_table(n, kind, mm, tt)
                if table is not None:
                    return table
    raise ConfigError(f"no valid operation table for n={n} voters with a {kind} state (m <= {SEARCH_MAX_M} searched)")


def assign_subgroups(
    n: int, kind: str, rng: np.random.Generator, m: int | None = None, travel: int | None = None
) -> SubgroupAssignment:
    """Valid table with its rows handed to voters in uniformly random order."""
    table = operation_table(n, kind, m, travel)
    table.check()
    return table.permuted(rng.permutation(n))


def voter_deduce(ca_bit: int, own_vote: int) -> int:
    """A voter's reading of V_n from the CA bit C_n and its own vote.

    C_n = 1 means the votes were mixed; C_n = 0 means they were unanimous,
    so the voter's own vote is everyone's vote.
    """
    return 1 if ca_bit == 1 else int(own_vote)
