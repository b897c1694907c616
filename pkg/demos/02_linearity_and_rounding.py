"""
Linearity defect and exact rounding
===================================

A family of observables A(a) indexed by n-bit strings is linear when
A(a)A(b) = A(a+b). The defect measures how far a family is from this on a
state, and the rounding step replaces it by an exactly linear family on a
larger space.
"""

# %%
# Start from the Z-type Pauli family and tilt each member by a random
# unitary of strength eps.
import numpy as np
from scipy.linalg import expm

from pauli_braiding import bits as bt
from pauli_braiding.linearity import ObservableFamily, blr_round, linearity_defect
from pauli_braiding.pauli import PauliWord, pauli_dense

rng = np.random.default_rng(1)
n = 2


def random_hermitian(dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def tilted_family(eps):
    members = {}
    for a in bt.all_strings(n):
        v = expm(1j * eps * random_hermitian(2**n))
        members[a] = v @ pauli_dense(PauliWord((0,) * n, a)) @ v.conj().T
    return ObservableFamily(n, members)


rho = np.eye(2**n) / 2**n

# %%
# The rounded family is exactly linear, and its average squared distance to
# the original family never exceeds the defect.
print(f"{'eps':>5}  {'defect':>10}  {'distance':>10}  {'linearity error':>16}")
for eps in (0.0, 0.05, 0.1, 0.2, 0.4, 0.8):
    fam = tilted_family(eps)
    delta = linearity_defect(fam, rho)
    res = blr_round(fam, rho)
    err = max(np.abs(res.family[a] @ res.family[b] - res.family[bt.xor(a, b)]).max()
              for a in bt.all_strings(n) for b in bt.all_strings(n))
    print(f"{eps:5.2f}  {delta:10.6f}  {res.avg_sq_distance:10.6f}  {err:16.1e}")
