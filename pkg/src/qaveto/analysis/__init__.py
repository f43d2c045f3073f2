"""Fidelity, efficiency and success-rate analysis."""

from .efficiency import (
    PAPER_4VOTER,
    PAPER_4VOTER_ETA,
    EfficiencyInputs,
    EfficiencyReport,
    counted_efficiency,
    efficiency_table,
    paper_inputs,
    qubit_efficiency,
    table_formula,
)
from .experiments import SuccessEstimate, iteration_profile, success_probability_experiment
from .fidelity import (
    CHANNELS,
    FIDELITY_PROTOCOLS,
    FidelityRow,
    NoiseSweep,
    TradeoffRow,
    average_fidelity_monte_carlo,
    average_fidelity_numeric,
    eta_grid,
    fidelity_closed_form,
    noise_sweep,
    robustness_vs_correctness_tradeoff,
)
from .reports import (
    EFFICIENCY_COLUMNS,
    FIDELITY_COLUMNS,
    SUCCESS_COLUMNS,
    efficiency_rows,
    fidelity_rows,
    success_rows,
    to_csv,
    write_csv,
)

__all__ = [
    "CHANNELS",
    "EFFICIENCY_COLUMNS",
    "FIDELITY_COLUMNS",
    "FIDELITY_PROTOCOLS",
    "PAPER_4VOTER",
    "PAPER_4VOTER_ETA",
    "SUCCESS_COLUMNS",
    "EfficiencyInputs",
    "EfficiencyReport",
    "FidelityRow",
    "NoiseSweep",
    "SuccessEstimate",
    "TradeoffRow",
    "average_fidelity_monte_carlo",
    "average_fidelity_numeric",
    "counted_efficiency",
    "efficiency_rows",
    "efficiency_table",
    "eta_grid",
    "fidelity_closed_form",
    "fidelity_rows",
    "iteration_profile",
    "noise_sweep",
    "paper_inputs",
    "qubit_efficiency",
    "robustness_vs_correctness_tradeoff",
    "success_probability_experiment",
    "success_rows",
    "table_formula",
    "to_csv",
    "write_csv",
]
