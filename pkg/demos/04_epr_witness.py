"""
An EPR witness and where it breaks
==================================

The witness averages Tr((S (x) S) rho) over all X/Z words S on n qubits.
For one pair it never exceeds the EPR fidelity. For two or more pairs it
can: a product of singlets has witness 1 and fidelity 0.
"""

# %%
import math

import numpy as np

from pauli_braiding.braiding import epr_witness
from pauli_braiding.states import epr_state

for n in (1, 2):
    w = epr_witness(epr_state(n), n)
    print(f"EPR^{n}: witness {w.witness:.3f}  fidelity {w.fidelity_exact:.3f}")

print("\nmaximally mixed pair:", epr_witness(np.eye(4) / 4, 1))

# %%
# Registers are ordered (A1 A2, B1 B2). Put a singlet on (A1, B1) and
# another on (A2, B2).
singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
state = np.einsum("ac,bd->abcd", singlet.reshape(2, 2), singlet.reshape(2, 2)).reshape(-1)
w = epr_witness(state, 2)
print(f"\ntwo singlets: witness {w.witness:.3f}  fidelity {w.fidelity_exact:.3f}")

# %%
# Random mixtures of EPR with noise show the same effect for n = 2, 3.
rng = np.random.default_rng(0)
for n in (1, 2, 3):
    bad = 0
    for _ in range(200):
        g = rng.normal(size=(4**n, 2)) + 1j * rng.normal(size=(4**n, 2))
        noise = g @ g.conj().T
        noise /= np.trace(noise).real
        e = epr_state(n)
        t = rng.uniform()
        w = epr_witness((1 - t) * np.outer(e, e.conj()) + t * noise, n)
        bad += w.witness > w.fidelity_exact + 1e-12
    print(f"n={n}: {bad} of 200 noisy states have witness above fidelity")
