"""Pairwise key establishment over a simulated ``Network``.

Four methods, all ending with both endpoints holding ``l`` bits:

``bb84_qkd``
    prepare-and-measure BB84 with sifting and a sacrificial confirmation subset.
``shared_bell``
    the CA hands out phi+ halves; both ends apply H and measure.
``orthogonal_qka``
    dense-coding key agreement with entangled decoys; key is K_ab xor K_ba.
``semiquantum_mediated``
    the CA mediates between two semiquantum parties who either measure-resend
    or reflect; key bits come from positions where both measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from ..errors import ConfigError, EavesdropAbort
from ..qsim import Qubit, Register, build_pauli_word, hadamard, prepare_state
from .decoys import DecoyConfig

if TYPE_CHECKING:
    from ..network import Network, Party

KEY_METHODS = ("bb84_qkd", "shared_bell", "orthogonal_qka", "semiquantum_mediated")
CONFIRM_FRACTION = 0.1

# two key bits -> dense-coding operation on the travel half of phi+
DENSE_CODE = {
    (0, 0): build_pauli_word(["I"]),
    (0, 1): build_pauli_word(["X"]),
    (1, 0): build_pauli_word(["iY"]),
    (1, 1): build_pauli_word(["Z"]),
}
# Bell outcome index (phi+, psi+, psi-, phi-) -> decoded bits
DENSE_DECODE = {0: (0, 0), 1: (0, 1), 2: (1, 0), 3: (1, 1)}


@dataclass(frozen=True)
class KeyString:
    bits: tuple[int, ...]
    endpoints: tuple[str, str]

    def __post_init__(self):
        if len(self.bits) == 0:
            raise ValueError("a key needs at least one bit")

    @property
    def length(self) -> int:
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))


def xor_bits(a, b) -> tuple[int, ...]:
    if len(a) != len(b):
        raise ValueError("xor of unequal-length bit strings")
    return tuple(int(x) ^ int(y) for x, y in zip(a, b))


def establish_key(
    method: str,
    net: "Network",
    a: "Party",
    b: "Party",
    l: int,
    mediator: "Party | None" = None,
) -> tuple[KeyString, KeyString]:
    """Run one key-establishment session; returns (key held by a, key held by b).

    Raises ``EavesdropAbort`` when a security check fails.
    """
    if a.pid == b.pid:
        raise ConfigError("key endpoints must be distinct")
    if l < 1:
        raise ConfigError(f"key length must be at least 1, got {l}")
    if method == "bb84_qkd":
        ka, kb = _bb84(net, a, b, l)
    elif method == "shared_bell":
        ka, kb = _shared_bell(net, _need(mediator, method), a, b, l)
    elif method == "orthogonal_qka":
        ka, kb = _orthogonal_qka(net, a, b, l)
    elif method == "semiquantum_mediated":
        ka, kb = _semiquantum(net, _need(mediator, method), a, b, l)
    else:
        raise ConfigError(f"unknown key method {method!r}")
    ends = (a.pid, b.pid)
    key_a, key_b = KeyString(tuple(ka), ends), KeyString(tuple(kb), ends)
    a.private.setdefault("keys", {})[b.pid] = key_a
    b.private.setdefault("keys", {})[a.pid] = key_b
    return key_a, key_b


def _need(mediator, method):
    if mediator is None:
        raise ConfigError(f"{method} needs a mediating party")
    return mediator


def _random_bits(rng, size) -> list[int]:
    return [int(x) for x in rng.integers(0, 2, size=size)]


def _bb84(net: "Network", a: "Party", b: "Party", l: int):
    rng = net.rng
    # smallest sifted length that leaves l bits after the confirmation subset
    target = l
    while target - math.ceil(CONFIRM_FRACTION * target) < l:
        target += 1
    sifted_a: list[int] = []
    sifted_b: list[int] = []
    while len(sifted_a) < target:
        raw = 2 * (target - len(sifted_a)) + 4
        bits = _random_bits(rng, raw)
        bases_a = _random_bits(rng, raw)
        sent = [a.prepare(("+-" if ba else "01")[x]) for x, ba in zip(bits, bases_a)]
        received = net.transmit(a.pid, b.pid, sent, kind="bb84_qubits")
        bases_b = _random_bits(rng, raw)
        outs = [b.measure(q, "diagonal" if bb else "computational", rng) for q, bb in zip(received, bases_b)]
        net.send(b.pid, a.pid, "bb84_bases", bases_b, bits=raw)
        net.recv(a.pid, "bb84_bases")
        net.send(a.pid, b.pid, "bb84_bases", bases_a, bits=raw)
        net.recv(b.pid, "bb84_bases")
        for x, y, ba, bb in zip(bits, outs, bases_a, bases_b):
            if ba == bb:
                sifted_a.append(x)
                sifted_b.append(y)
    sifted_a, sifted_b = sifted_a[:target], sifted_b[:target]
    n_check = math.ceil(CONFIRM_FRACTION * target)
    check = sorted(int(i) for i in rng.choice(target, size=n_check, replace=False)) if n_check else []
    net.send(a.pid, b.pid, "bb84_confirm", {"positions": check, "bits": [sifted_a[i] for i in check]})
    net.recv(b.pid, "bb84_confirm")
    if check:
        errors = sum(sifted_a[i] != sifted_b[i] for i in check)
        rate = errors / len(check)
        net.transcript.log(b.pid, "*", "bb84_verdict", {"errors": errors, "checked": len(check)})
        if rate > net.decoys.error_threshold:
            raise EavesdropAbort(f"qkd_confirm:{a.pid}-{b.pid}", rate)
    checked = set(check)
    keep = [i for i in range(target) if i not in checked][:l]
    return [sifted_a[i] for i in keep], [sifted_b[i] for i in keep]


def distribute_bell_pairs(net: "Network", source: "Party", a: "Party", b: "Party", count: int):
    """``source`` prepares phi+ pairs and securely sends first halves to a, second to b."""
    regs = [Register(prepare_state("bell"), f"{a.pid}|{b.pid}") for _ in range(count)]
    qa = net.transmit(source.pid, a.pid, [Qubit(r, 0) for r in regs], kind="bell_halves")
    qb = net.transmit(source.pid, b.pid, [Qubit(r, 1) for r in regs], kind="bell_halves")
    return qa, qb


def _shared_bell(net, ca, a, b, l):
    qa, qb = distribute_bell_pairs(net, ca, a, b, l)
    h = hadamard()
    ka = [_h_measure(a, q, h, net.rng) for q in qa]
    kb = [_h_measure(b, q, h, net.rng) for q in qb]
    return ka, kb


def _h_measure(party, q, h, rng) -> int:
    party.apply([q], h)
    return party.measure(q, "computational", rng)


def _orthogonal_qka(net: "Network", a: "Party", b: "Party", l: int):
    rng = net.rng
    pairs = math.ceil(l / 2)
    k_ab = _random_bits(rng, l)
    k_ba = _random_bits(rng, l)
    a.private["qka_own"] = k_ab
    b.private["qka_own"] = k_ba
    gv = DecoyConfig(net.decoys.ratio, "gv_decoys", net.decoys.error_threshold)
    regs = [Register(prepare_state("bell"), f"{a.pid}>{b.pid}") for _ in range(pairs)]
    home = [Qubit(r, 0) for r in regs]
    travel = net.transmit(a.pid, b.pid, [Qubit(r, 1) for r in regs], kind="qka_travel", decoys=gv)
    padded = k_ba + [0] * (2 * pairs - l)
    for j, q in enumerate(travel):
        b.apply([q], DENSE_CODE[(padded[2 * j], padded[2 * j + 1])])
    announced: list[int] = []

    def commit():
        # a commits to K_ab before b reveals where the encoded qubits sit
        net.send(a.pid, b.pid, "qka_announce", k_ab)
        announced.extend(net.recv(b.pid, "qka_announce"))

    back = net.transmit(b.pid, a.pid, travel, kind="qka_encoded", decoys=gv, before_reveal=commit)
    decoded: list[int] = []
    for h, t in zip(home, back):
        rec = h.register.measure("bell", [h.index, t.index], rng)
        decoded.extend(DENSE_DECODE[rec.outcome])
    decoded = decoded[:l]
    return xor_bits(k_ab, decoded), xor_bits(announced, k_ba)


def _semiquantum(net: "Network", ca: "Party", a: "Party", b: "Party", l: int):
    rng = net.rng
    key_a: list[int] = []
    key_b: list[int] = []
    ctrl_checked = ctrl_errors = 0
    while len(key_a) < l:
        batch = 4 * (l - len(key_a)) + 8
        regs = [Register(prepare_state("bell"), f"{a.pid}~{b.pid}") for _ in range(batch)]
        fa = net.transmit(ca.pid, a.pid, [Qubit(r, 0) for r in regs], kind="sq_out", protect=False)
        fb = net.transmit(ca.pid, b.pid, [Qubit(r, 1) for r in regs], kind="sq_out", protect=False)
        ra, ta, ba = _classical_turn(a, fa, rng)
        rb, tb, bb = _classical_turn(b, fb, rng)
        back_a = net.transmit(a.pid, ca.pid, ba, kind="sq_return", protect=False)
        back_b = net.transmit(b.pid, ca.pid, bb, kind="sq_return", protect=False)
        c = []
        for qa, qb in zip(back_a, back_b):
            if qa.register is qb.register:
                out = qa.register.measure("bell", [qa.index, qb.index], rng).outcome
            else:
                out = _bell_on_product(qa, qb, rng)
            c.append(0 if out == 0 else 1)
        net.broadcast(ca.pid, "sq_c", c)
        net.send(a.pid, b.pid, "sq_r", ra)
        net.send(b.pid, a.pid, "sq_r", rb)
        net.recv(b.pid, "sq_r")
        net.recv(a.pid, "sq_r")
        net.drain_broadcasts()
        for j in range(batch):
            if ra[j] == 1 and rb[j] == 1:
                ctrl_checked += 1
                ctrl_errors += c[j]
            elif ra[j] == 0 and rb[j] == 0:
                key_a.append(ta[j])
                key_b.append(tb[j])
    rate = ctrl_errors / ctrl_checked if ctrl_checked else 0.0
    net.transcript.log(a.pid, "*", "sq_verdict", {"errors": ctrl_errors, "checked": ctrl_checked})
    if rate > net.decoys.error_threshold:
        raise EavesdropAbort(f"sqkd_ctrl:{a.pid}-{b.pid}", rate)
    return key_a[:l], key_b[:l]


def _classical_turn(party: "Party", qubits, rng):
    """Measure-resend (r=0) or reflect (r=1) each qubit; only Z-basis actions."""
    r = _random_bits(rng, len(qubits))
    t: list[int | None] = []
    out = []
    for q, rj in zip(qubits, r):
        if rj == 0:
            bit = party.measure(q, "computational", rng)
            t.append(bit)
            fresh = party.prepare(str(bit))
            # the measured qubit stays behind; the fresh one takes its place
            out.append(fresh)
        else:
            t.append(None)
            out.append(q)
    return r, t, out


def _bell_on_product(qa: Qubit, qb: Qubit, rng) -> int:
    """Bell measurement on two qubits held in separate registers."""
    reg = qa.register
    offset = reg.extend(qb.register.state)
    return reg.measure("bell", [qa.index, offset + qb.index], rng).outcome
