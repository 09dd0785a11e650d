"""
Two-qubit states and concurrence
================================

The double dot holds one optional exciton per dot, so its state is a 4x4
density matrix in the basis |00>, |01>, |10>, |11> (lower dot first).
"""

import numpy as np

from effent.states import (
    bell_state,
    concurrence,
    random_state,
    real_part,
    werner_state,
    x_state,
)

# The single-exciton Bell states are maximally entangled.
plus = bell_state("+")
print("Bell |+>:\n", np.round(plus.matrix.real, 3))
print("C(|+>) =", concurrence(plus))

# Mixing with white noise: the Werner family loses entanglement at p = 1/3.
for p in (0.2, 1 / 3, 0.5, 0.8, 1.0):
    print(f"Werner p={p:.3f}  C={concurrence(werner_state(p)):.4f}")

# An X state has a closed-form concurrence 2 max(0, |h| - sqrt(ad), |g| - sqrt(bc)).
rho = x_state(a=0.1, b=0.4, c=0.4, d=0.1, h=0.35)
print("X state with h=0.35, ad=0.01:  C =", round(concurrence(rho), 6), " closed form =", 2 * (0.35 - 0.1))

# Dropping imaginary parts never increases concurrence. This is what lets the
# minimizers search over real matrices only.
gaps = [concurrence(random_state(s)) - concurrence(real_part(random_state(s))) for s in range(500)]
print(f"min C(rho) - C(Re rho) over 500 random states: {min(gaps):.2e}")
