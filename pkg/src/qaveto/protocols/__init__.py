"""Protocol state machines: RKQAV, WQAV and QAV-1 to QAV-7."""

from .common import (
    ITERATIVE,
    PROBABILISTIC,
    PROTOCOLS,
    QAV7_STATES,
    XOR_FAMILY,
    ProtocolConfig,
    RunOutcome,
    VoteVector,
    fixed_policy,
    max_iterations,
    switching_policy,
    v2,
    veto_or,
)
from .ghz import run_rkqav, run_wqav
from .ring import run_qav6, run_qav7
from .subgroups import BUILTIN_TABLES, SubgroupAssignment, assign_subgroups, operation_table, voter_deduce
from .xor import run_xor_veto


def run_protocol(cfg: ProtocolConfig, votes: VoteVector, rng, **kw) -> RunOutcome:
    """Dispatch to the run function for ``cfg.protocol``."""
    p = cfg.protocol
    if p == "rkqav":
        return run_rkqav(cfg, votes, rng, **kw)
    if p == "wqav":
        return run_wqav(cfg, votes, rng, **kw)
    if p == "qav6":
        return run_qav6(cfg, votes, rng, **kw)
    if p == "qav7":
        return run_qav7(cfg, votes, rng, **kw)
    return run_xor_veto(cfg.validate(), votes, rng, **kw)


__all__ = [
    "BUILTIN_TABLES",
    "ITERATIVE",
    "PROBABILISTIC",
    "PROTOCOLS",
    "QAV7_STATES",
    "XOR_FAMILY",
    "ProtocolConfig",
    "RunOutcome",
    "SubgroupAssignment",
    "VoteVector",
    "assign_subgroups",
    "fixed_policy",
    "max_iterations",
    "operation_table",
    "run_protocol",
    "run_qav6",
    "run_qav7",
    "run_rkqav",
    "run_wqav",
    "run_xor_veto",
    "switching_policy",
    "v2",
    "veto_or",
    "voter_deduce",
]
