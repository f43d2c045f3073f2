"""Qubit efficiency of every scheme for four voters, as exact rationals.

Three routes agree: the term-by-term schedule, the compact row formula,
and (for the ring schemes) counting a simulated transcript.
"""

from qaveto.analysis import counted_efficiency, paper_inputs, qubit_efficiency, table_formula
from qaveto.protocols import PROTOCOLS

for p in PROTOCOLS:
    inp = paper_inputs(p)
    rep = qubit_efficiency(inp)
    print(f"{p:6s} q={str(rep.q):4s} b={str(rep.b):3s} eta={rep.eta} (formula {table_formula(inp)})")

print("\nring schemes counted from transcripts")
for n in range(3, 9):
    six, seven = counted_efficiency("qav6", n), counted_efficiency("qav7", n)
    print(f"n={n}: qav6 {six.eta} ({six.inputs.l} iterations), qav7 {seven.eta} (m={seven.inputs.m})")
