"""
From a chain to a witness and back
==================================

A nonnegative tuple on the arc gets a witness from ``build_witness``; the
witness is turned back into a chain cover by ``extract_chain``.
"""

from fractions import Fraction as F

from continua.chainability import build_witness, extract_chain, psi0, refines, sigma_parts
from continua.space import OpenSet, PLFunction, interval

I = interval()

# four bumps whose positive sets overlap only with their neighbours
fs = [
    PLFunction(I, {"e": [(0, 1), (F(1, 5), 1), (F(3, 10), 0), (1, 0)]}),
    PLFunction(I, {"e": [(0, 0), (F(1, 5), 0), (F(3, 10), F(4, 5)), (F(9, 20), F(4, 5)), (F(11, 20), 0), (1, 0)]}),
    PLFunction(I, {"e": [(0, 0), (F(9, 20), 0), (F(11, 20), F(7, 10)), (F(7, 10), F(7, 10)), (F(4, 5), 0), (1, 0)]}),
    PLFunction(I, {"e": [(0, 0), (F(7, 10), 0), (F(4, 5), 1), (1, 1)]}),
]
for f in fs:
    print(f)

delta = psi0(fs).value / 2
w = build_witness(fs, delta)
print(f"\ndelta = {delta}, m = {w.m}, eps = {w.eps}, eps' = {w.eps_prime}")

parts = sigma_parts(fs, w)
for key in ("psi0_f", "psi0_g", "psi1", "psi2", "gap", "value"):
    print(f"{key:>7}: {parts[key]}")

cert = extract_chain(fs, w, check_hypotheses=False)
print("\nchain links:", len(cert.chain), "assignment:", cert.assignment)
print("refines the positive sets:", bool(refines(cert.chain, [OpenSet(f) for f in fs])))
print("verification problems:", cert.verify())
