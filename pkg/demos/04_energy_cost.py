"""
Energy cost of the optimal schedules
====================================

The cost is the time average of the Frobenius norm of eps0 H0 + eps1 H1.
For the double bang it is sqrt(Tr (H0 + H1)^2) = sqrt(32). Unbounded
controls pay more below the critical time and nothing extra above it.
"""

import numpy as np

from twocontrol import build_teleportation
from twocontrol.experiments import RunSettings, run_scheme
from twocontrol.tbqcp import TbqcpConfig

spec = build_teleportation()
settings = RunSettings(tbqcp=TbqcpConfig(max_iters=1000), steps_per_unit=500)

print(f"sqrt(32) = {np.sqrt(32):.6f}")
print(f"{'T':>5} {'Unlimited2':>11} {'Limited2':>9} {'LAE':>7}")
for T in (0.6, 1.0, 1.3, 1.6):
    costs = [run_scheme(spec, s, T, settings).cost for s in ("Unlimited2", "Limited2", "LAE")]
    print(f"{T:5.1f} {costs[0]:11.5f} {costs[1]:9.5f} {costs[2]:7.4f}")
