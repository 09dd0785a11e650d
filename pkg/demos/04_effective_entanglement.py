"""
Effective entanglement from incomplete data
===========================================

The effective entanglement is the smallest concurrence of any state that
reproduces the measured values. Less data means a larger feasible set and
a smaller guaranteed entanglement.
"""

from effent.effective import (
    ConstraintSet,
    brute_force_oracle,
    eff_full,
    eff_xz,
    eff_z,
    min_concurrence,
    real_restrict,
)
from effent.measurement import MeasurementRecord, observe
from effent.states import concurrence, random_state

# z alone: the fidelity bound max(0, z - 1) is exact.
for z in (0.8, 1.0, 1.5, 2.0):
    print(f"z={z}:  eff_z={eff_z(z).value:.4f}")

# The generic minimizer and the brute-force oracle agree with it.
cs = real_restrict(ConstraintSet.from_record(MeasurementRecord({"z": 1.5}, "z_only")))
res = min_concurrence(cs)
print(f"generic: {res.value:.6f} (violation {res.max_violation:.1e}), oracle: {brute_force_oracle(cs):.6f}")

# x and z: the coherent-state recipe that maximizes ad is only a candidate.
# Off-diagonals it leaves at zero can lower the concurrence further.
res = eff_xz(0.3, 1.5)
print("eff_xz(0.3, 1.5):", res.candidates, "->", round(res.value, 6))

# The full setup: only the off-diagonals other than h are unknown.
print("eff_full |+>-like:", eff_full(0.0, 0.5, 0.5, 0.0, 0.5).value)
print("eff_full coherent point:", round(eff_full(0.1, 0.3, 0.3, 0.3, 0.3).value, 6))

# More data never lowers the bound.
rho = random_state(11)
x, z = observe(rho, "x"), observe(rho, "z")
print("chain:",
      round(eff_z(z).value, 4), "<=",
      round(eff_xz(x, z).value, 4), "<=",
      round(eff_full(*rho.diagonals, rho.h.real).value, 4), "<=",
      round(concurrence(rho), 4))
