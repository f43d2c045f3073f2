"""Walk through the deterministic schemes on four voters.

The dense-coding ring uses one table row per voter; the iterative ring
needs up to 1 + floor(log2 n) Bell pairs, with the veto count's 2-adic
valuation deciding the round that concludes.
"""

import itertools

import numpy as np

from qaveto.protocols import ProtocolConfig, VoteVector, operation_table, run_protocol

table = operation_table(4, "ghz")
print("4-voter GHZ operations:", [" x ".join(w) for w in table.words])

print("\nvotes  C_n  verdict")
cfg = ProtocolConfig("qav7", 4)
for w in itertools.product((0, 1), repeat=4):
    out = run_protocol(cfg, VoteVector(w), np.random.default_rng(0))
    print("".join(map(str, w)), "  ", out.result, " ", out.verdict())

print("\nIterative Bell ring, vetoers first")
for k in range(5):
    votes = VoteVector(tuple([1] * k + [0] * (4 - k)))
    out = run_protocol(ProtocolConfig("qav6", 4), votes, np.random.default_rng(k))
    print(f"k={k}: {out.verdict():9s} after {out.iterations_used} iteration(s)")
