import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest

from qaveto.analysis import (
    EFFICIENCY_COLUMNS,
    FIDELITY_COLUMNS,
    PAPER_4VOTER_ETA,
    SUCCESS_COLUMNS,
    EfficiencyInputs,
    NoiseSweep,
    average_fidelity_monte_carlo,
    average_fidelity_numeric,
    counted_efficiency,
    efficiency_rows,
    efficiency_table,
    eta_grid,
    fidelity_closed_form,
    fidelity_rows,
    iteration_profile,
    noise_sweep,
    paper_inputs,
    qubit_efficiency,
    robustness_vs_correctness_tradeoff,
    success_probability_experiment,
    success_rows,
    table_formula,
    to_csv,
    write_csv,
)
from qaveto.errors import ConfigError
from qaveto.protocols import PROBABILISTIC, PROTOCOLS, ProtocolConfig, max_iterations

GRID = [round(0.05 * i, 10) for i in range(20)]
FORMULA_CASES = [(p, c) for p in ("qav1", "qav2", "qav4", "qav5", "qav6", "qav7") for c in ("amplitude", "phase")]


# fidelity

@pytest.mark.parametrize("protocol,channel", FORMULA_CASES)
def test_numeric_matches_closed_form_on_grid(protocol, channel):
    for eta in GRID:
        num = average_fidelity_numeric(protocol, channel, eta)
        assert abs(num - fidelity_closed_form(protocol, channel, eta)) <= 1e-9


@pytest.mark.parametrize("protocol", ["qav1", "qav2", "qav3", "qav4", "qav5", "qav6", "qav7"])
@pytest.mark.parametrize("channel", ["amplitude", "phase"])
def test_noiseless_fidelity_is_one(protocol, channel):
    assert average_fidelity_numeric(protocol, channel, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_examples():
    assert fidelity_closed_form("qav1", "amplitude", 0.0, l=5) == 1.0
    eta = 0.37
    assert average_fidelity_numeric("qav2", "amplitude", eta) == pytest.approx(1 - eta + eta**2 / 2, abs=1e-12)
    e = 0.2
    expected = -e**5 / 2 + 5 * e**4 / 2 - 5 * e**3 + 5 * e**2 - 5 * e / 2 + 1
    assert fidelity_closed_form("qav7", "phase", e) == pytest.approx(expected, abs=1e-15)
    assert average_fidelity_numeric("qav7", "phase", e) == pytest.approx(expected, abs=1e-9)


def test_copies_raise_per_copy_value_to_the_power_l():
    f1 = average_fidelity_numeric("qav1", "phase", 0.3)
    assert average_fidelity_numeric("qav1", "phase", 0.3, l=4) == pytest.approx(f1**4, abs=1e-12)
    assert fidelity_closed_form("qav1", "phase", 0.3, l=4) == pytest.approx(f1**4, abs=1e-12)


def test_qav3_per_pair_fidelity_and_published_form():
    # one Bell pair carries two key bits; the comparison holds at even l only
    for eta in GRID:
        ad = average_fidelity_numeric("qav3", "amplitude", eta, l=2)
        pd = average_fidelity_numeric("qav3", "phase", eta, l=2)
        assert ad == pytest.approx((1 - eta / 2) ** 2, abs=1e-9)
        assert pd == pytest.approx(fidelity_closed_form("qav3", "phase", eta, l=2), abs=1e-9)
    with pytest.raises(ConfigError):
        fidelity_closed_form("qav3", "phase", 0.2, l=3)


@pytest.mark.parametrize("protocol,channel", FORMULA_CASES)
def test_closed_forms_nonincreasing(protocol, channel):
    vals = [fidelity_closed_form(protocol, channel, e) for e in GRID + [1.0]]
    assert vals[0] == 1.0
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("protocol", ["qav1", "qav6", "qav7"])
def test_amplitude_damping_hurts_more(protocol):
    for eta in GRID:
        assert fidelity_closed_form(protocol, "amplitude", eta) <= fidelity_closed_form(protocol, "phase", eta) + 1e-12


def test_monte_carlo_agrees_with_enumeration(rng):
    for protocol in ("qav1", "qav2", "qav6"):
        exact = average_fidelity_numeric(protocol, "amplitude", 0.4)
        est = average_fidelity_monte_carlo(protocol, "amplitude", 0.4, 4000, rng)
        assert abs(est - exact) <= 4 * math.sqrt(0.25 / 4000)


def test_fidelity_validation():
    with pytest.raises(ConfigError):
        average_fidelity_numeric("qav1", "depolarizing", 0.1)
    with pytest.raises(ConfigError):
        average_fidelity_numeric("qav1", "phase", 1.2)
    with pytest.raises(ConfigError):
        average_fidelity_numeric("rkqav", "phase", 0.1)
    with pytest.raises(ConfigError):
        fidelity_closed_form("qav6", "phase", 0.1, n=5)
    with pytest.raises(ConfigError):
        average_fidelity_numeric("qav6", "phase", 0.1, l=2)
    with pytest.raises(ConfigError):
        NoiseSweep("qav1", "phase", (0.1, 1.3))
    with pytest.raises(ConfigError):
        NoiseSweep("qav1", "phase", (0.1,), method="monte_carlo")


def test_qav6_other_ring_sizes_have_no_formula():
    rows = noise_sweep(NoiseSweep("qav6", "phase", (0.0, 0.3), n=3))
    assert rows[0].closed_form is None and rows[0].abs_diff is None
    assert rows[0].numeric == pytest.approx(1.0)


def test_sweep_rows_and_grid():
    assert eta_grid(0, 0.9, 0.1) == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    rows = noise_sweep(NoiseSweep("qav6", "amplitude", eta_grid(0, 0.9, 0.1)))
    assert len(rows) == 10 and max(r.abs_diff for r in rows) <= 1e-9


def test_tradeoff():
    rows = robustness_vs_correctness_tradeoff("qav1", "amplitude", 0.1, range(1, 11))
    assert all(a.fidelity > b.fidelity and a.correctness < b.correctness for a, b in zip(rows, rows[1:]))
    assert all(r.fidelity == 1.0 for r in robustness_vs_correctness_tradeoff("qav2", "phase", 0.0, [1, 5, 9]))
    with pytest.raises(ConfigError):
        robustness_vs_correctness_tradeoff("qav1", "amplitude", 0.1, [0])
    with pytest.raises(ConfigError):
        robustness_vs_correctness_tradeoff("qav6", "amplitude", 0.1, [1])


# efficiency

@pytest.mark.parametrize("protocol", PROTOCOLS)
def test_four_voter_column(protocol):
    inp = paper_inputs(protocol)
    rep = qubit_efficiency(inp)
    assert rep.eta == PAPER_4VOTER_ETA[protocol] == table_formula(inp)
    assert isinstance(rep.eta, Fraction) and rep.c == 1


def test_published_examples():
    assert qubit_efficiency(EfficiencyInputs("wqav", 4, 10, 1, 1)).eta == Fraction(1, 360)
    assert qubit_efficiency(EfficiencyInputs("qav6", 4, 2, 0, 1)).eta == Fraction(1, 24)
    assert qubit_efficiency(EfficiencyInputs("qav7", 4, 2, 0, 1, m=3)).eta == Fraction(1, 24)
    assert qubit_efficiency(EfficiencyInputs("qav4", 4, 10)).eta == Fraction(1, 520)


@pytest.mark.parametrize("protocol", PROTOCOLS)
@pytest.mark.parametrize("n", range(3, 9))
def test_schedule_matches_row_formula(protocol, n):
    for l in (1, 2, 3, 10):
        for d0, d1 in ((0, 0), (1, 1), (2, 1), (Fraction(1, 2), 3)):
            m = max(n - 1, l + 1) if protocol == "qav7" else None
            inp = EfficiencyInputs(protocol, n, l, d0, d1, m)
            assert qubit_efficiency(inp).eta == table_formula(inp)


@pytest.mark.parametrize("protocol", ["qav6", "qav7"])
@pytest.mark.parametrize("n", range(3, 9))
def test_transcript_counting_matches_formula(protocol, n):
    counted = counted_efficiency(protocol, n, delta1=1)
    assert counted.eta == table_formula(counted.inputs) == qubit_efficiency(counted.inputs).eta


def test_counting_rejects_other_protocols():
    with pytest.raises(ConfigError):
        counted_efficiency("qav1", 4)


def test_efficiency_validation():
    with pytest.raises(ConfigError):
        EfficiencyInputs("qav7", 4, 2)
    with pytest.raises(ConfigError):
        EfficiencyInputs("qav7", 4, 3, m=3)
    with pytest.raises(ConfigError):
        EfficiencyInputs("qav1", 4, 0)
    with pytest.raises(ConfigError):
        EfficiencyInputs("qav1", 4, 2, delta1=-1)


def test_efficiency_table_column():
    reports = efficiency_table(4, 10, 1, 1, ring_l=2)
    assert [r.eta for r in reports] == [PAPER_4VOTER_ETA[p] for p in PROTOCOLS]


# success probability and iterations

@pytest.mark.parametrize("protocol", PROBABILISTIC)
def test_success_l1(protocol, rng):
    est = success_probability_experiment(ProtocolConfig(protocol, 4, l=1), 2, 50_000, rng)
    assert est.expected == 0.5 and est.within()


@pytest.mark.parametrize("protocol", PROBABILISTIC)
def test_success_l10(protocol, rng):
    est = success_probability_experiment(ProtocolConfig(protocol, 4, l=10), 1, 100_000, rng)
    assert est.expected == pytest.approx(1 - 2**-10) and est.within()
    lo, hi = est.ci()
    assert lo <= est.rate <= hi


@pytest.mark.parametrize("protocol", PROBABILISTIC)
def test_success_k0_is_zero(protocol, rng):
    est = success_probability_experiment(ProtocolConfig(protocol, 4, l=3), 0, 10_000, rng)
    assert est.successes == 0 and est.within()


def test_success_state_engine(rng):
    est = success_probability_experiment(ProtocolConfig("qav1", 3, l=1), 1, 200, rng, engine="state")
    assert est.within()
    with pytest.raises(ConfigError):
        success_probability_experiment(ProtocolConfig("qav6", 3), 1, 10, rng)
    with pytest.raises(ConfigError):
        success_probability_experiment(ProtocolConfig("qav1", 3), 5, 10, rng)


def test_iteration_profiles():
    for p in ("rkqav", "qav6"):
        assert iteration_profile(p, 4) == {0: 3, 1: 1, 2: 2, 3: 1, 4: 3}
        assert max(iteration_profile(p, 2).values()) == 2
        assert max(iteration_profile(p, 8).values()) == 4
    for n in (3, 5, 12, 16):
        assert max(iteration_profile("qav6", n).values()) == max_iterations(n)
    with pytest.raises(ConfigError):
        iteration_profile("qav6", 17)
    with pytest.raises(ConfigError):
        iteration_profile("qav1", 4)


# reports

def _parse(text):
    return list(csv.reader(io.StringIO(text)))


def test_csv_schemas(tmp_path, rng):
    fid = to_csv(FIDELITY_COLUMNS, fidelity_rows(noise_sweep(NoiseSweep("qav1", "phase", (0.0, 0.5)))))
    rows = _parse(fid)
    assert rows[0] == ["protocol", "channel", "eta", "closed_form", "numeric", "abs_diff"] and len(rows) == 3
    eff = _parse(to_csv(EFFICIENCY_COLUMNS, efficiency_rows(efficiency_table(4, 10, 1, 1))))
    assert eff[0] == list(EFFICIENCY_COLUMNS)
    wqav = dict(zip(eff[0], eff[2]))
    assert (wqav["protocol"], wqav["eta_num"], wqav["eta_den"]) == ("wqav", "1", "360")
    est = success_probability_experiment(ProtocolConfig("qav2", 4, l=2), 1, 1000, rng)
    succ = _parse(to_csv(SUCCESS_COLUMNS, success_rows([est])))
    assert succ[0] == list(SUCCESS_COLUMNS) and succ[1][0] == "qav2"
    path = write_csv(tmp_path / "eff.csv", EFFICIENCY_COLUMNS, efficiency_rows(efficiency_table(4, 10, 1, 1)))
    assert path.read_text() == to_csv(EFFICIENCY_COLUMNS, efficiency_rows(efficiency_table(4, 10, 1, 1)))
    with pytest.raises(OSError):
        write_csv(tmp_path / "missing" / "x.csv", EFFICIENCY_COLUMNS, [])
