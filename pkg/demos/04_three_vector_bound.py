"""
How many samples make the recovery unambiguous?
===============================================

With fair-coin weights, a_i + a_j - a_k stays in {-1, 0, 1}^m only with
probability (7/8)^m. A union bound over all triples gives a sample count
beyond which spurious short vectors are unlikely.
"""

# %%
from fractions import Fraction

from hssplab.hssp import (
    PropositionQuery,
    bound_constants_hold,
    min_m_bound,
    proposition_mc,
    proposition_probability,
)

for m in (1, 3, 10, 30):
    q = PropositionQuery(n=10, m=m, epsilon=Fraction(1, 100), trials=100_000)
    print(f"m={m:3d} exact {float(proposition_probability(m)):.5f}  simulated {float(proposition_mc(q, seed=m)):.5f}")

# %%
for n in (2, 10, 100):
    print("n =", n, " m needed for eps=0.01:", min_m_bound(n, Fraction(1, 100)))

# the rounded constants, checked with integers only
print(bound_constants_hold())
