"""
Reading the dots with a single-electron transistor
==================================================

Each SET placement distinguishes two charge configurations, modelled as a
pair of projectors. Only a few combinations of density-matrix entries
are ever observed.
"""

from effent.measurement import (
    SetConfiguration,
    observe,
    reconstruct_diagonals,
    reconstruct_reh,
    record,
)
from effent.states import bell_state, random_state

for config in SetConfiguration:
    print(f"{config.value:16s} reads {config.observable}")

# |+> and |-> agree on x but are told apart by the midpoint SET.
for sign in "+-":
    rho = bell_state(sign)
    print(f"|{sign}>: x={observe(rho, 'x'):.3f}  z={observe(rho, 'z'):.3f}")

# The three setups record different subsets.
rho = random_state(7)
for setup in ("full", "xz", "z_only"):
    print(f"{setup:7s}", record(rho, setup).to_csv_line())

# With the full setup, all occupations and Re h come back.
x, y, z, d = (observe(rho, k) for k in "xyzd")
print("occupations", [round(v, 6) for v in reconstruct_diagonals(x, y, d)])
print("true       ", [round(v, 6) for v in rho.diagonals])
print("Re h       ", round(reconstruct_reh(x, y, z, d), 6), "true", round(rho.h.real, 6))
