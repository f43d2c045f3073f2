import itertools
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import binom

from conftest import within_sigmas
from qaveto.adversary import Attack, tap_intercept_resend
from qaveto.errors import CapabilityError, ConfigError, DecoyMapError, EavesdropAbort
from qaveto.network import Network, Party
from qaveto.primitives import (
    BB84_LABELS,
    KEY_METHODS,
    ChannelSegment,
    DecoyConfig,
    decoy_protect,
    decoy_verify,
    eliminated_state,
    establish_key,
    extract_payload,
    qds_enroll,
    qds_verify,
    xor_bits,
)
from qaveto.primitives.keys import _classical_turn
from qaveto.qsim import Qubit, Register, StateVector, bb84_state, hadamard, prepare_state
from qaveto.qsim.channels import apply_channel, density_probabilities


def _payload(size):
    return [Qubit(Register(StateVector.from_bitstring("0"), "p"), 0) for _ in range(size)]


def _segment(size, **cfg):
    return ChannelSegment("A", "B", _payload(size), DecoyConfig(**cfg))


# decoy_protect

def test_ratio_one_doubles_the_sequence(rng):
    seq, rec = decoy_protect(_segment(10), rng)
    assert len(rec.positions) == 10 and len(seq) == 20 and rec.total == 20
    assert all(label in BB84_LABELS for label in rec.prepared)


def test_ratio_two_gives_twenty_decoys(rng):
    seq, rec = decoy_protect(_segment(10, ratio=2), rng)
    assert len(rec.positions) == 20 and len(seq) == 30


def test_too_few_decoys_rejected(rng):
    with pytest.raises(ValueError):
        decoy_protect(_segment(10, ratio=0.05), rng)
    with pytest.raises(ValueError):
        decoy_protect(ChannelSegment("A", "B", []), rng)
    with pytest.raises(ValueError):
        DecoyConfig(ratio=0)
    with pytest.raises(ValueError):
        DecoyConfig(error_threshold=1.5)


def test_payload_order_preserved(rng):
    payload = _payload(6)
    seq, rec = decoy_protect(ChannelSegment("A", "B", payload), rng)
    out = extract_payload(seq, rec)
    assert all(a is b for a, b in zip(out, payload))


def test_decoy_positions_uniform(rng):
    counts = np.zeros(4)
    trials = 20_000
    for _ in range(trials):
        _, rec = decoy_protect(ChannelSegment("A", "B", _payload(2), DecoyConfig(ratio=1)), rng)
        counts[list(rec.positions)] += 1
    for c in counts:
        assert within_sigmas(int(c), trials, 0.5)


def test_decoy_labels_uniform(rng):
    _, rec = decoy_protect(_segment(20_000), rng)
    for label in BB84_LABELS:
        assert within_sigmas(rec.prepared.count(label), 20_000, 0.25)


# decoy_verify

def test_clean_channel_proceeds(rng):
    seq, rec = decoy_protect(_segment(50), rng)
    v = decoy_verify(seq, rec, rng)
    assert v.error_rate == 0 and v.passed


def test_malformed_map_rejected(rng):
    seq, rec = decoy_protect(_segment(4), rng)
    with pytest.raises(DecoyMapError):
        decoy_verify(seq[:-1], rec, rng)
    with pytest.raises(DecoyMapError):
        decoy_verify(seq, replace(rec, positions=(0, 0, 1, 2)), rng)
    with pytest.raises(DecoyMapError):
        decoy_verify(seq, replace(rec, prepared=rec.prepared[:2]), rng)


def test_semiquantum_receiver_cannot_check_diagonal(rng):
    seq, rec = decoy_protect(_segment(40), rng)
    with pytest.raises(CapabilityError):
        decoy_verify(seq, rec, rng, semiquantum=True)


def _ir_error_oracle():
    # enumerate decoy label x Eve basis x Eve outcome x receiver outcome
    total = 0.0
    for label in BB84_LABELS:
        rho = bb84_state(label).density()
        basis = "computational" if label in "01" else "diagonal"
        truth = {"0": 0, "1": 1, "+": 0, "-": 1}[label]
        for eve in ("computational", "diagonal"):
            probs = density_probabilities(rho, eve, [0])
            for outcome, p in enumerate(probs):
                resent = bb84_state(("01" if eve == "computational" else "+-")[outcome]).density()
                q = density_probabilities(resent, basis, [0])
                total += 0.25 * 0.5 * p * q[1 - truth]
    return total


def test_intercept_resend_error_oracle_is_one_quarter():
    assert _ir_error_oracle() == pytest.approx(0.25, abs=1e-12)


def test_intercept_resend_per_decoy_error(rng):
    errors = checked = 0
    for _ in range(100):
        seq, rec = decoy_protect(_segment(40), rng)
        tap_intercept_resend(seq, rng, list(range(len(seq))))
        v = decoy_verify(seq, rec, rng)
        errors += v.errors
        checked += v.checked
    assert within_sigmas(errors, checked, 0.25)


def test_threshold_controls_verdict(rng):
    seq, rec = decoy_protect(_segment(100), rng)
    tap_intercept_resend(seq, rng, list(range(len(seq))))
    assert not decoy_verify(seq, rec, rng, threshold=0.0).passed
    seq, rec = decoy_protect(_segment(100), rng)
    tap_intercept_resend(seq, rng, list(range(len(seq))))
    assert decoy_verify(seq, rec, rng, threshold=1.0).passed


# entangled-pair decoys

def test_gv_decoys_clean_pairs_always_phi_plus(rng):
    seq, rec = decoy_protect(_segment(30, subroutine="gv_decoys"), rng)
    assert len(rec.pairs) * 2 == len(rec.positions)
    assert decoy_verify(seq, rec, rng).errors == 0


def test_gv_one_half_intercept_resend_oracle():
    # brute force over the 4-dimensional pair space: Eve measures qubit 1 in a random basis and resends
    bell = prepare_state("bell").density()
    h = hadamard().matrix
    fail = 0.0
    for basis in ("computational", "diagonal"):
        for b in (0, 1):
            proj = np.zeros((2, 2), dtype=complex)
            proj[b, b] = 1
            if basis == "diagonal":
                proj = h @ proj @ h
            p = np.kron(np.eye(2), proj)
            post = p @ bell.matrix @ p
            prob = np.trace(post).real
            probs = density_probabilities(type(bell)(post / prob), "bell", [0, 1])
            fail += 0.5 * prob * (1 - probs[0])
    assert fail == pytest.approx(0.5, abs=1e-12)


def test_gv_one_half_intercept_resend_sampled(rng):
    errors = checked = 0
    for _ in range(200):
        seq, rec = decoy_protect(_segment(20, subroutine="gv_decoys"), rng)
        tap_intercept_resend(seq, rng, [b for _, b in rec.pairs])
        v = decoy_verify(seq, rec, rng)
        errors += v.errors
        checked += v.checked
    assert within_sigmas(errors, checked, 0.5)


def test_gv_pairing_map_checked(rng):
    seq, rec = decoy_protect(_segment(4, subroutine="gv_decoys"), rng)
    with pytest.raises(DecoyMapError):
        decoy_verify(seq, replace(rec, pairs=rec.pairs[:-1]), rng)


# decoy secrecy

def test_attack_statistics_do_not_depend_on_which_positions(rng):
    # Eve hits a fixed block of s positions or a random s-subset; decoy hits are equally likely either way
    s, trials = 10, 1500
    rates = []
    for pick in ("fixed", "random"):
        errors = 0
        for _ in range(trials):
            seq, rec = decoy_protect(_segment(10), rng)
            pos = list(range(s)) if pick == "fixed" else sorted(rng.choice(len(seq), s, replace=False))
            tap_intercept_resend(seq, rng, pos)
            errors += decoy_verify(seq, rec, rng).errors > 0
        rates.append(errors / trials)
    # per-trial detection: 1 - E[(3/4)^H], H hypergeometric(20, 10, 10)
    h = np.arange(11)
    from scipy.stats import hypergeom
    expected = 1 - float(np.sum(hypergeom.pmf(h, 20, 10, s) * 0.75**h))
    for r in rates:
        assert within_sigmas(round(r * trials), trials, expected)
    assert abs(rates[0] - rates[1]) <= 4 * np.sqrt(2 * expected * (1 - expected) / trials)


def test_error_probability_decreases_with_decoy_count():
    # qualitative check of the exponential bound: miss probability under a fixed attack shrinks with t
    miss = [0.75**t for t in (1, 5, 10, 20, 40)]
    assert all(a > b for a, b in zip(miss, miss[1:]))


# elimination signatures

def test_eliminated_state_examples():
    assert eliminated_state("computational", 1) == "0"
    assert eliminated_state("diagonal", 0) == "-"


def test_enrollment_records_the_orthogonal_state(rng):
    sig, sent = qds_enroll("V0", 400, rng, sent=["1"] * 200 + ["+"] * 200)
    for label, basis, elim in zip(sent, sig.measurement_bases, sig.eliminated):
        assert elim != label
        if label == "1" and basis == "computational":
            assert elim == "0"
        if label == "+" and basis == "diagonal":
            assert elim == "-"


def test_honest_declaration_accepted(rng):
    sig, sent = qds_enroll("V0", 300, rng)
    verdict = qds_verify(sent, sig, 0.0)
    assert verdict.accepted and verdict.mismatch_fraction == 0


def test_qds_errors(rng):
    with pytest.raises(ValueError):
        qds_enroll("V0", 0, rng)
    sig, sent = qds_enroll("V0", 5, rng)
    with pytest.raises(ValueError):
        qds_verify(sent[:-1], sig, 0.1)


def _forger_oracle():
    # enumerate sent state x CA basis x outcome x forged declaration
    total = 0.0
    for label in BB84_LABELS:
        for basis in ("computational", "diagonal"):
            probs = density_probabilities(bb84_state(label).density(), basis, [0])
            for outcome, p in enumerate(probs):
                elim = eliminated_state(basis, outcome)
                total += 0.25 * 0.5 * p * sum(d == elim for d in BB84_LABELS) / 4
    return total


def test_forger_mismatch_rate(rng):
    oracle = _forger_oracle()
    assert oracle == pytest.approx(0.25, abs=1e-12)
    sig, _ = qds_enroll("V0", 100_000, rng)
    forged = [BB84_LABELS[i] for i in rng.integers(0, 4, size=100_000)]
    frac = qds_verify(forged, sig, 0.1).mismatch_fraction
    assert within_sigmas(round(frac * 100_000), 100_000, oracle)


def test_forger_rejected_at_length_200(rng):
    # binomial tail: accept only with at most 20 hits out of 200 at rate 1/4
    assert binom.cdf(20, 200, 0.25) <= 0.01
    rejected = 0
    for _ in range(200):
        sig, _ = qds_enroll("V0", 200, rng)
        forged = [BB84_LABELS[i] for i in rng.integers(0, 4, size=200)]
        rejected += not qds_verify(forged, sig, 0.1).accepted
    assert rejected >= 196


# key establishment

def _net(seed=3, **kw):
    net = Network(np.random.default_rng(seed), **kw)
    a, b, ca = Party("V0"), Party("V1"), Party("CA")
    net.add(a, b, ca)
    return net, a, b, ca


@pytest.mark.parametrize("method", KEY_METHODS)
@pytest.mark.parametrize("l", [1, 7, 10])
def test_keys_symmetric_noiseless(method, l):
    net, a, b, ca = _net(seed=l)
    if method == "semiquantum_mediated":
        a.semiquantum = b.semiquantum = True
    ka, kb = establish_key(method, net, a, b, l, mediator=ca)
    assert ka.bits == kb.bits and ka.length == l
    assert a.private["keys"]["V1"] is ka and b.private["keys"]["V0"] is kb


def test_key_errors():
    net, a, b, ca = _net()
    with pytest.raises(ConfigError):
        establish_key("bb84_qkd", net, a, a, 4)
    with pytest.raises(ConfigError):
        establish_key("bb84_qkd", net, a, b, 0)
    with pytest.raises(ConfigError):
        establish_key("shared_bell", net, a, b, 4)
    with pytest.raises(ConfigError):
        establish_key("quantum_telepathy", net, a, b, 4)


def test_orthogonal_key_is_xor_of_both_strings():
    assert xor_bits((1, 0, 1, 1), (0, 1, 1, 0)) == (1, 1, 0, 1)
    net, a, b, _ = _net(seed=11)
    ka, _ = establish_key("orthogonal_qka", net, a, b, 9)
    assert ka.bits == xor_bits(a.private["qka_own"], b.private["qka_own"])


def test_keys_abort_under_intercept_resend():
    for method in ("bb84_qkd", "shared_bell", "orthogonal_qka"):
        net, a, b, ca = _net(seed=5, attack=Attack("intercept_resend"))
        with pytest.raises(EavesdropAbort):
            establish_key(method, net, a, b, 16, mediator=ca)


def test_semiquantum_abort_under_intercept_resend():
    net, a, b, ca = _net(seed=5, attack=Attack("intercept_resend"))
    a.semiquantum = b.semiquantum = True
    with pytest.raises(EavesdropAbort):
        establish_key("semiquantum_mediated", net, a, b, 16, mediator=ca)


def test_semiquantum_party_restrictions():
    p = Party("V0", semiquantum=True)
    with pytest.raises(CapabilityError):
        p.prepare("+")
    with pytest.raises(CapabilityError):
        p.apply([p.prepare("0")], hadamard())


def test_semiquantum_yield_is_about_a_quarter(rng):
    # from 40 Bell pairs both parties measure at about 10 positions, and those bits agree
    a, b = Party("V0", semiquantum=True), Party("V1", semiquantum=True)
    total, reps = 0, 500
    for _ in range(reps):
        regs = [Register(prepare_state("bell"), "ab") for _ in range(40)]
        ra, ta, _ = _classical_turn(a, [Qubit(r, 0) for r in regs], rng)
        rb, tb, _ = _classical_turn(b, [Qubit(r, 1) for r in regs], rng)
        keep = [j for j in range(40) if ra[j] == 0 and rb[j] == 0]
        assert all(ta[j] == tb[j] for j in keep)
        total += len(keep)
    assert within_sigmas(total, 40 * reps, 0.25)


def test_semiquantum_control_positions_never_fail():
    # with threshold 0 any c=1 at a both-reflect position aborts; clean runs never do
    for seed in range(20):
        net, a, b, ca = _net(seed=seed)
        a.semiquantum = b.semiquantum = True
        establish_key("semiquantum_mediated", net, a, b, 12, mediator=ca)


def test_bb84_confirmation_catches_noise():
    from qaveto.qsim import make_channel

    with pytest.raises(EavesdropAbort):
        for seed in range(10):
            net, a, b, _ = _net(seed=seed, channel=make_channel("amplitude", 0.6),
                                decoys=DecoyConfig(ratio=0.01))
            establish_key("bb84_qkd", net, a, b, 60)
