"""
Double bang and the critical time
=================================

Hold both controls at their upper bound for the whole horizon. Below the
critical time this "double bang" is the best a bounded two-control schedule
can do; above it the target becomes exactly reachable.
"""

import numpy as np

from twocontrol import build_teleportation
from twocontrol.metrics import double_bang_curve, double_bang_fidelity, find_critical_time

spec = build_teleportation()

# smallest T at which the double bang gets within 1e-4 of the target
Tc = find_critical_time(spec)
print(f"critical time Tc = {Tc:.4f}")

# the simulated curve against the closed-form sine-squared shape
print(f"{'T':>6} {'simulated':>10} {'formula':>10}")
for T in np.linspace(0.0, 2 * Tc, 12):
    print(f"{T:6.3f} {double_bang_fidelity(spec, T):10.6f} {double_bang_curve(T, Tc):10.6f}")

# The spectrum of H0 + H1 is {-2 sqrt2, 0, +2 sqrt2}, so the exact curve is
# 0.25 + 0.75 sin^2(sqrt2 T); its first peak sits at pi / (2 sqrt2).
print(f"exact first peak at {np.pi / (2 * np.sqrt(2)):.4f}")
