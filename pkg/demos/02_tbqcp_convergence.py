"""
Monotonic optimization with bounded controls
============================================

Run the optimizer for the three optimized schemes at T = 1.0, starting from
the linear ramp, and watch the fidelity climb monotonically.
"""

import numpy as np

from twocontrol import build_teleportation
from twocontrol.pmp import pmp_residuals
from twocontrol.propagate import TimeGrid
from twocontrol.tbqcp import TbqcpConfig, tbqcp_iterate

spec = build_teleportation()
T = 1.0
grid = TimeGrid.for_time(T)

for scheme in ("Unlimited2", "Limited2", "LimitedSingle"):
    res = tbqcp_iterate(spec, TbqcpConfig(scheme=scheme, max_iters=2000), grid)
    trace = res.fidelity_trace
    marks = [k for k in (0, 10, 100, 500, 1000, 2000) if k < trace.size]
    print(f"\n{scheme}: {res.message}")
    print("  " + "  ".join(f"F[{k}]={trace[k]:.4f}" for k in marks))
    print(f"  final F = {res.fidelity:.6f}, worst step dF = {np.diff(trace).min():.1e}")
    c = res.controls
    print(f"  eps0 in [{c.eps0.min():.3f}, {c.eps0.max():.3f}], eps1 in [{c.eps1.min():.3f}, {c.eps1.max():.3f}]")
    rep = pmp_residuals(res.diagnostics, c)
    print(f"  control Hamiltonian mean {rep.cham_mean:.3e}, std {rep.cham_std:.1e}")
    # samples next to t = 0 and t = T move slowly because Phi0(0) = Phi1(T) = 0
    frac = min(rep.consistent0.mean(), rep.consistent1.mean())
    print(f"  bang/singular consistency: {100 * frac:.1f}% of steps")
