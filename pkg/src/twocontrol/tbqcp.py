"""Monotonic two-point boundary-value optimizer with amplitude clamping.

Each iteration evolves the target observable backward under the current
controls, then sweeps forward from the initial state. At every step of the
forward sweep the control corrections

    f_k(t) = 2 Im <psi(t)| O(t) H_k |psi(t)>

are computed at the step midpoint from the *current* state and the previous
iteration's observable, the step controls are updated by ``eta * f_k`` (clamped to
``[0, 1]`` for bounded schemes) and the state is advanced with the updated
step. Because the update has the sign of the local gradient, the fidelity is
non-decreasing from one iteration to the next.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import ProtocolSpec
from .pmp import PmpDiagnostics, diagnose
from .propagate import ControlField, TimeGrid, fidelity

__all__ = [
    "Scheme",
    "ClampMode",
    "TbqcpConfig",
    "OptimizationResult",
    "MONOTONIC_SLACK",
    "apply_scheme_coupling",
    "clamp",
    "tbqcp_iterate",
]

log = logging.getLogger(__name__)

MONOTONIC_SLACK = 1e-10


class Scheme(str, enum.Enum):
    UNLIMITED2 = "Unlimited2"
    LIMITED2 = "Limited2"
    LIMITED_SINGLE = "LimitedSingle"

    @property
    def bounded(self) -> bool:
        return self is not Scheme.UNLIMITED2

    @property
    def code(self) -> int:
        return {
            Scheme.UNLIMITED2: _kernels.UNLIMITED2,
            Scheme.LIMITED2: _kernels.LIMITED2,
            Scheme.LIMITED_SINGLE: _kernels.LIMITED_SINGLE,
        }[self]


class ClampMode(str, enum.Enum):
    PROJECT = "Project"
    FREEZE_ON_CROSS = "FreezeOnCross"

    @property
    def code(self) -> int:
        return _kernels.PROJECT if self is ClampMode.PROJECT else _kernels.FREEZE_ON_CROSS


@dataclass(frozen=True)
class TbqcpConfig:
    """Optimizer settings.

    The initial guess is always the linear ramp ``eps0 = 1 - t/T``,
    ``eps1 = t/T`` unless explicit controls are passed to
    :func:`tbqcp_iterate`.
    """

    eta: float = 5e-3
    max_iters: int = 2000
    scheme: Scheme = Scheme.LIMITED2
    clamp_mode: ClampMode = ClampMode.PROJECT
    convergence_tol: float = 1e-9
    patience: int = 10
    snapshot_every: int = 100

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "clamp_mode", ClampMode(self.clamp_mode))
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.patience < 1 or self.snapshot_every < 1:
            raise ValueError("patience and snapshot_every must be >= 1")


@dataclass(eq=False)
class OptimizationResult:
    controls: ControlField
    fidelity_trace: np.ndarray  # entry 0 is the initial guess
    final_state: np.ndarray
    iterations_run: int
    converged: bool
    diagnostics: PmpDiagnostics
    corrections: tuple[np.ndarray, np.ndarray]  # f0, f1 from the last sweep
    snapshots: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    aborted: bool = False
    message: str = ""

    @property
    def fidelity(self) -> float:
        return float(self.fidelity_trace[-1])


def apply_scheme_coupling(f0: float, f1: float, scheme: Scheme, eta: float = 1.0) -> tuple[float, float]:
    """Control increments for one step before clamping.

    For the single-control scheme ``eps1 = 1 - eps0``, so the gradient with
    respect to the free control is ``f0 - f1`` and ``eps1`` moves opposite.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.LIMITED_SINGLE:
        d = eta * (f0 - f1)
        return d, -d
    return eta * f0, eta * f1


def clamp(eps: float, mode: ClampMode = ClampMode.PROJECT, frozen: int = 0) -> tuple[float, int]:
    """Clamp a candidate control value to ``[0, 1]``.

    Returns the clamped value and the updated frozen flag. In
    ``FreezeOnCross`` mode a sample that ever crosses a bound stays pinned
    there; pass the flag back in on subsequent iterations. For frozen samples
    `eps` is ignored and the caller's stored value must be kept.
    """
    mode = ClampMode(mode)
    if mode is ClampMode.FREEZE_ON_CROSS and frozen:
        return eps, frozen
    if eps > 1.0:
        return 1.0, int(mode is ClampMode.FREEZE_ON_CROSS)
    if eps < 0.0:
        return 0.0, int(mode is ClampMode.FREEZE_ON_CROSS)
    return float(eps), 0


def tbqcp_iterate(
    spec: ProtocolSpec,
    config: TbqcpConfig,
    grid: TimeGrid,
    initial: ControlField | None = None,
    callback=None,
) -> OptimizationResult:
    """Run the optimizer until convergence or ``config.max_iters`` sweeps.

    Convergence is declared once ``|dF| < convergence_tol`` for `patience`
    consecutive iterations. A fidelity drop larger than ``MONOTONIC_SLACK``
    stops the run with ``aborted=True``; that signals a step size or
    implementation fault rather than a property of the problem.

    `callback`, if given, is called as ``callback(iteration, F, eps0, eps1)``
    after every sweep.
    """
    scheme = config.scheme
    if initial is None:
        initial = ControlField.linear_ramp(grid, bounded=scheme.bounded)
    if initial.grid != grid:
        raise ValueError("initial controls are defined on a different grid")
    e0 = initial.eps0.copy()
    e1 = initial.eps1.copy()
    if scheme.bounded:
        e0 = np.clip(e0, 0.0, 1.0)
        e1 = 1.0 - e0 if scheme is Scheme.LIMITED_SINGLE else np.clip(e1, 0.0, 1.0)
    frozen0 = np.zeros(grid.n_steps, dtype=np.int64)
    frozen1 = np.zeros(grid.n_steps, dtype=np.int64)

    H0 = np.ascontiguousarray(spec.H0)
    H1 = np.ascontiguousarray(spec.H1)
    psi0 = np.ascontiguousarray(spec.psi0)
    O = np.ascontiguousarray(spec.observable)

    V, U = _kernels.half_steps(e0, e1, H0, H1, grid.dt)
    psi = psi0
    for Ui in U:
        psi = Ui @ psi
    trace = [fidelity(psi, spec.target)]
    snapshots = {0: (e0.copy(), e1.copy())}
    f0 = f1 = np.zeros(grid.n_steps)

    converged = aborted = False
    message = ""
    quiet = 0
    it = 0
    for it in range(1, config.max_iters + 1):
        O_nodes = _kernels.backward_observable(O, U)
        psi, f0, f1, V, U = _kernels.forward_sweep(
            e0, e1, frozen0, frozen1, H0, H1, psi0, O_nodes, V, grid.dt, config.eta, scheme.code, config.clamp_mode.code
        )
        F = fidelity(psi, spec.target)
        dF = F - trace[-1]
        trace.append(F)
        if it % config.snapshot_every == 0:
            snapshots[it] = (e0.copy(), e1.copy())
        if callback is not None:
            callback(it, F, e0, e1)
        if dF < -MONOTONIC_SLACK:
            aborted = True
            message = f"fidelity decreased by {-dF:.3e} at iteration {it}; reduce eta or refine the grid"
            log.warning(message)
            break
        quiet = quiet + 1 if abs(dF) < config.convergence_tol else 0
        if quiet >= config.patience:
            converged = True
            message = f"converged after {it} iterations"
            break
    else:
        message = f"iteration budget of {config.max_iters} exhausted"

    controls = ControlField(grid, e0, e1, bounded=scheme.bounded)
    diag, _ = diagnose(spec, controls)
    snapshots.setdefault(it, (e0.copy(), e1.copy()))
    return OptimizationResult(
        controls=controls,
        fidelity_trace=np.asarray(trace),
        final_state=psi,
        iterations_run=it,
        converged=converged,
        diagnostics=diag,
        corrections=(f0, f1),
        snapshots=snapshots,
        aborted=aborted,
        message=message,
    )
