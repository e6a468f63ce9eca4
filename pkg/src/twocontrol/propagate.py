"""Piecewise-constant propagation on a uniform time grid.

Controls are sampled at step midpoints and each step is propagated with the
exact exponential of the (constant) step Hamiltonian. Forward state evolution
and backward Heisenberg evolution of an observable share the same step
unitaries, so pairings such as ``<psi(t)|O(t)|psi(t)>`` are conserved to
roundoff rather than to discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ProtocolSpec

__all__ = [
    "STEPS_PER_UNIT",
    "TimeGrid",
    "ControlField",
    "Trajectory",
    "step_unitaries",
    "evolve_forward",
    "evolve_observable_backward",
    "final_state",
    "fidelity",
]

# default resolution: grid steps per tau0 of final time
STEPS_PER_UNIT = 2000


@dataclass(frozen=True)
class TimeGrid:
    t_final: float
    n_steps: int

    def __post_init__(self):
        if not (self.t_final > 0 and np.isfinite(self.t_final)):
            raise ValueError(f"t_final must be positive and finite, got {self.t_final!r}")
        if self.n_steps < 2:
            raise ValueError(f"n_steps must be >= 2, got {self.n_steps}")

    @classmethod
    def for_time(cls, t_final: float, steps_per_unit: int = STEPS_PER_UNIT) -> "TimeGrid":
        return cls(float(t_final), max(2, int(round(steps_per_unit * t_final))))

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_steps) + 0.5) * self.dt

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_final, self.n_steps * factor)


@dataclass(eq=False)
class ControlField:
    """Two control schedules, one sample per grid step (taken at the midpoint).

    When `bounded` is set every sample must lie in ``[0, 1]`` exactly.
    """

    grid: TimeGrid
    eps0: np.ndarray
    eps1: np.ndarray
    bounded: bool = False

    def __post_init__(self):
        self.eps0 = np.array(self.eps0, dtype=float)
        self.eps1 = np.array(self.eps1, dtype=float)
        n = self.grid.n_steps
        if self.eps0.shape != (n,) or self.eps1.shape != (n,):
            raise ValueError(
                f"control arrays must have length n_steps={n}, got {self.eps0.shape} and {self.eps1.shape}"
            )
        if self.bounded and not self.within_bounds():
            raise ValueError("bounded control field has samples outside [0, 1]")

    def within_bounds(self) -> bool:
        return bool(
            np.all((self.eps0 >= 0) & (self.eps0 <= 1)) and np.all((self.eps1 >= 0) & (self.eps1 <= 1))
        )

    def copy(self) -> "ControlField":
        return ControlField(self.grid, self.eps0.copy(), self.eps1.copy(), self.bounded)

    @classmethod
    def constant(cls, grid: TimeGrid, eps0: float, eps1: float, bounded: bool = False) -> "ControlField":
        n = grid.n_steps
        return cls(grid, np.full(n, float(eps0)), np.full(n, float(eps1)), bounded)

    @classmethod
    def linear_ramp(cls, grid: TimeGrid, bounded: bool = True) -> "ControlField":
        """Linear adiabatic schedule ``eps0 = 1 - t/T``, ``eps1 = t/T``."""
        s = grid.midpoints / grid.t_final
        return cls(grid, 1.0 - s, s, bounded)

    @classmethod
    def from_functions(
        cls,
        grid: TimeGrid,
        f0: Callable[[np.ndarray], np.ndarray],
        f1: Callable[[np.ndarray], np.ndarray],
        bounded: bool = False,
    ) -> "ControlField":
        t = grid.midpoints
        return cls(grid, np.broadcast_to(f0(t), t.shape), np.broadcast_to(f1(t), t.shape), bounded)


@dataclass(eq=False)
class Trajectory:
    """Grid-node time series of either states or observables (not both)."""

    times: np.ndarray
    states: np.ndarray | None = None
    observables: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1] if self.states is not None else self.observables[-1]


def step_unitaries(spec: ProtocolSpec, controls: ControlField, err: np.ndarray | None = None) -> np.ndarray:
    """Stack of step propagators ``exp(-i H_i dt)``, shape ``(n_steps, d, d)``."""
    H = controls.eps0[:, None, None] * spec.H0 + controls.eps1[:, None, None] * spec.H1
    if err is not None:
        err = np.asarray(err)
        if err.shape != spec.H0.shape:
            raise ValueError(f"error Hamiltonian has shape {err.shape}, expected {spec.H0.shape}")
        H = H + err
    H = 0.5 * (H + np.conj(np.swapaxes(H, 1, 2)))
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * w * controls.grid.dt)
    return (V * phases[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))


def evolve_forward(
    spec: ProtocolSpec,
    controls: ControlField,
    err: np.ndarray | None = None,
    unitaries: np.ndarray | None = None,
) -> Trajectory:
    """Propagate ``spec.psi0`` through the grid; returns all n_steps+1 states."""
    U = step_unitaries(spec, controls, err) if unitaries is None else unitaries
    n = controls.grid.n_steps
    states = np.empty((n + 1, spec.dim), dtype=np.complex128)
    states[0] = spec.psi0
    for i in range(n):
        states[i + 1] = U[i] @ states[i]
    return Trajectory(controls.grid.edges, states=states)


def final_state(spec: ProtocolSpec, controls: ControlField, err: np.ndarray | None = None) -> np.ndarray:
    U = step_unitaries(spec, controls, err)
    psi = spec.psi0.copy()
    for Ui in U:
        psi = Ui @ psi
    return psi


def evolve_observable_backward(
    O_final: np.ndarray,
    controls: ControlField,
    spec: ProtocolSpec | None = None,
    err: np.ndarray | None = None,
    unitaries: np.ndarray | None = None,
) -> Trajectory:
    """Heisenberg-evolve `O_final` from t=T back to t=0.

    ``O(t_i) = U_i^dagger O(t_{i+1}) U_i`` with the forward step unitaries.
    Either `spec` (to build the unitaries) or `unitaries` must be given.
    """
    O_final = np.asarray(O_final, dtype=np.complex128)
    if unitaries is None:
        if spec is None:
            raise ValueError("either spec or unitaries is required")
        unitaries = step_unitaries(spec, controls, err)
    n = controls.grid.n_steps
    if unitaries.shape[0] != n or unitaries.shape[1:] != O_final.shape:
        raise ValueError("observable and step unitaries have mismatched dimensions")
    obs = np.empty((n + 1,) + O_final.shape, dtype=np.complex128)
    obs[n] = O_final
    for i in range(n - 1, -1, -1):
        U = unitaries[i]
        obs[i] = U.conj().T @ obs[i + 1] @ U
    return Trajectory(controls.grid.edges, observables=obs)


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """Squared overlap ``|<target|state>|^2``."""
    return float(abs(np.vdot(target, state)) ** 2)
