"""
Lattice toolbox tour
====================

Reduction, shortest vectors and orthogonal lattices on small examples.
Everything is exact integer arithmetic.
"""

# %%
from hssplab.exactmath import dot, hnf
from hssplab.lattice import (
    ReductionParams,
    bkz_reduce,
    is_lll_reduced,
    lll_reduce,
    orthogonal_lattice,
    orthogonal_lattice_mod,
    svp_enumerate,
)

# a skewed basis of Z^2
B = [[1, 0], [4, 1]]
print("LLL:", lll_reduce(B))
print("reduced?", is_lll_reduced(B), "->", is_lll_reduced(lll_reduce(B)))

# %%
# the HNF is a canonical fingerprint: same lattice, same HNF
B = [[201, 37, 15], [1648, 297, 122], [73, 14, 5]]
L = lll_reduce(B)
print("LLL basis:", L)
print("same lattice:", hnf(B) == hnf(L))

# %%
# exhaustive enumeration finds a true shortest vector; BKZ with a full
# block puts it first
v = svp_enumerate(B)
print("shortest:", v, "norm^2", dot(v, v))
print("BKZ first row:", bkz_reduce(B, ReductionParams(beta=3))[0])

# %%
# vectors y with <y, h> = 0 mod Q; the lattice has determinant Q
h, Q = [2, 1], 5
basis, degenerate = orthogonal_lattice_mod(h, Q)
print(basis, [dot(y, h) % Q for y in basis])

# exact orthogonal of (1,1,1), and back again
O = orthogonal_lattice([[1, 1, 1]])
print("orthogonal:", O, "double orthogonal:", orthogonal_lattice(O))
