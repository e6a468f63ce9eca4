"""
Robustness to systematic local errors
=====================================

Optimize once at T = 1.6, then freeze the controls and add a constant
single-qubit Pauli term alpha * sigma to the Hamiltonian. Nine channels
(x, y, z on each qubit) are scanned.
"""

from twocontrol import build_teleportation
from twocontrol.experiments import run_scheme
from twocontrol.metrics import robustness_scan

spec = build_teleportation()
alphas = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]

for scheme in ("Limited2", "QAOA"):
    run = run_scheme(spec, scheme, 1.6)
    rep = robustness_scan(spec, run.controls, alphas)
    print(f"\n{scheme} (F = {rep.baseline:.6f})")
    print("alpha " + " ".join(f"{lab:>7}" for lab in rep.labels))
    for a, row in zip(rep.alphas, rep.table):
        print(f"{a:5.2f} " + " ".join(f"{x:7.4f}" for x in row))
    print(f"worst drop at alpha = 0.1: {100 * rep.worst_drop[-1]:.2f} % ({rep.worst_label[-1]})")
