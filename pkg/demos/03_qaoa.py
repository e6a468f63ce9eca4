"""
Alternating bang-bang schedules
===============================

QAOA restricts the schedule to alternating blocks of H1 and H0. The block
durations are searched by a particle swarm on the simplex sum = T.
"""

from twocontrol import build_teleportation
from twocontrol.qaoa import PsoConfig, pso_optimize

spec = build_teleportation()
cfg = PsoConfig(restarts=4)

for T in (1.0, 1.3, 1.5, 1.6, 1.8):
    row = []
    for p in (1, 2, 3):
        res = pso_optimize(spec, T, p, cfg)
        row.append(f"p={p}: {res.fidelity:.5f}")
    print(f"T={T:.1f}  " + "  ".join(row))

# the best p=1 schedule at T = 1.5: an H1 block followed by an H0 block
params, F = pso_optimize(spec, 1.5, 1, cfg)
print(f"\nT=1.5, p=1: gamma = {params.gammas[0]:.4f}, beta = {params.betas[0]:.4f}, F = {F:.6f}")
