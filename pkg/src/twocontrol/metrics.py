"""Experiment-level quantities: fidelity sweeps, energy cost, robustness."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import expm_unitary
from .model import ProtocolSpec, build_error_hamiltonian, error_channels
from .propagate import ControlField, TimeGrid, final_state, fidelity

__all__ = [
    "SweepResult",
    "RobustnessReport",
    "CubicFit",
    "energy_cost",
    "double_bang_curve",
    "double_bang_fidelity",
    "find_critical_time",
    "robustness_scan",
    "cubic_fit_report",
]

log = logging.getLogger(__name__)


@dataclass(eq=False)
class SweepResult:
    scheme: str
    T: np.ndarray
    F: np.ndarray
    cost: np.ndarray
    manifests: list = field(default_factory=list)


@dataclass(eq=False)
class RobustnessReport:
    T: float
    alphas: np.ndarray
    labels: list[str]
    table: np.ndarray  # (n_alpha, 9)
    baseline: float  # error-free fidelity

    @property
    def worst(self) -> np.ndarray:
        return self.table.min(axis=1)

    @property
    def worst_label(self) -> list[str]:
        return [self.labels[k] for k in self.table.argmin(axis=1)]

    @property
    def worst_drop(self) -> np.ndarray:
        return self.baseline - self.worst


@dataclass
class CubicFit:
    control: str
    start: int
    stop: int
    coefficients: np.ndarray | None = None  # highest power first, in t
    r2: float | None = None
    notice: str = ""


def energy_cost(controls: ControlField, spec: ProtocolSpec) -> float:
    """Time average of ``sqrt(Tr H(t)^2)`` for ``H = eps0 H0 + eps1 H1``.

    Midpoint rule over the control steps; any error Hamiltonian is excluded.
    """
    g = controls.grid
    H = controls.eps0[:, None, None] * spec.H0 + controls.eps1[:, None, None] * spec.H1
    norms = np.sqrt(np.einsum("nij,nji->n", H, H).real.clip(min=0.0))
    return float(norms.sum() * g.dt / g.t_final)


def double_bang_curve(T, Tc: float):
    """Closed-form approximation ``0.25 + 0.75 sin^2(pi T / (2 Tc))``."""
    if not Tc > 0:
        raise ValueError("Tc must be positive")
    return 0.25 + 0.75 * np.sin(np.pi * np.asarray(T, dtype=float) / (2 * Tc)) ** 2


def double_bang_fidelity(spec: ProtocolSpec, T: float, steps_per_unit: int | None = None) -> float:
    """Fidelity with both controls held at 1 for the whole horizon.

    The Hamiltonian is constant, so by default a single exact exponential is
    used. Passing `steps_per_unit` propagates on a grid instead.
    """
    if T == 0:
        return fidelity(spec.psi0, spec.target)
    if steps_per_unit is None:
        psi = expm_unitary(spec.H0 + spec.H1, T) @ spec.psi0
    else:
        psi = final_state(spec, ControlField.constant(TimeGrid.for_time(T, steps_per_unit), 1.0, 1.0))
    return fidelity(psi, spec.target)


def find_critical_time(
    spec: ProtocolSpec,
    resolution: float = 0.01,
    threshold: float = 1 - 1e-4,
    t_max: float = 10.0,
    steps_per_unit: int | None = None,
) -> float:
    """Smallest T with double-bang fidelity >= `threshold`.

    Scans upward in steps of `resolution` to bracket the first crossing, then
    bisects to 1e-10. Returns 0 when the initial state already meets the
    threshold.
    """
    if resolution > 0.01 or resolution <= 0:
        raise ValueError("resolution must be in (0, 0.01]")
    F = lambda T: double_bang_fidelity(spec, T, steps_per_unit)  # noqa: E731
    if F(0.0) >= threshold:
        log.info("initial state already meets the threshold; critical time is 0")
        return 0.0
    lo = 0.0
    hi = resolution
    while F(hi) < threshold:
        lo = hi
        hi += resolution
        if hi > t_max:
            raise RuntimeError(f"no critical time found below t_max={t_max}")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if F(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def robustness_scan(spec: ProtocolSpec, controls: ControlField, alphas) -> RobustnessReport:
    """Fidelity of fixed controls under every single-Pauli local error.

    The controls are not re-optimized; each (axis, qubit) error term
    ``alpha * sigma`` is added to the Hamiltonian and the state re-propagated.
    """
    alphas = np.asarray(alphas, dtype=float)
    channels = error_channels(spec.n_qubits)
    labels = [f"{axis}{q}" for axis, q in channels]
    baseline = fidelity(final_state(spec, controls), spec.target)
    table = np.empty((alphas.size, len(channels)))
    for a, alpha in enumerate(alphas):
        for c, (axis, q) in enumerate(channels):
            if alpha == 0:
                table[a, c] = baseline
            else:
                err = build_error_hamiltonian(axis, q, alpha, spec.n_qubits)
                table[a, c] = fidelity(final_state(spec, controls, err), spec.target)
    return RobustnessReport(controls.grid.t_final, alphas, labels, table, baseline)


def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    best = (0, 0)
    start = None
    for i, m in enumerate(np.append(mask, False)):
        if m and start is None:
            start = i
        elif not m and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return best


def cubic_fit_report(controls: ControlField, min_samples: int = 5) -> list[CubicFit]:
    """Least-squares cubic per control on its longest unclamped interval.

    For bounded fields a sample counts as clamped when it sits exactly on 0
    or 1. R^2 is reported but not judged.
    """
    t = controls.grid.midpoints
    out = []
    for name, eps in (("eps0", controls.eps0), ("eps1", controls.eps1)):
        free = (eps > 0) & (eps < 1) if controls.bounded else np.ones(eps.size, bool)
        a, b = _longest_run(free)
        if b - a < min_samples:
            out.append(CubicFit(name, a, b, notice=f"unclamped interval has {b - a} samples; fit skipped"))
            continue
        tt, yy = t[a:b], eps[a:b]
        coef = np.polyfit(tt, yy, 3)
        resid = yy - np.polyval(coef, tt)
        ss_tot = float(np.sum((yy - yy.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
        out.append(CubicFit(name, a, b, coef, r2))
    return out

