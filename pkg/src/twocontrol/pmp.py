"""Pontryagin maximum principle diagnostics.

Sign convention. The costate obeys the same Schroedinger equation as the
state, ``i d|lambda>/dt = H(t)|lambda>``, with ``|lambda(T)> = O|psi(T)>``.
With the switching functions ``Phi_k(t) = 2 Im <lambda(t)|H_k|psi(t)>`` this
makes ``Phi_k(t)`` the functional derivative of ``J = <psi(T)|O|psi(T)>``
with respect to ``eps_k(t)``: a positive ``Phi_k`` means increasing the control
raises the fidelity.

The control Hamiltonian ``eps0*Phi0 + eps1*Phi1`` is exactly constant inside a
step, so the series here are evaluated at step midpoints, where the control
samples live. Boundary values at t=0 and t=T are reported separately.
``xi = 2 Re <lambda|[H0, H1]|psi>`` gives the drift of the switching sum,
``d(Phi0 + Phi1)/dt = (eps0 - eps1) xi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import commutator
from .model import ProtocolSpec
from .propagate import ControlField, Trajectory, evolve_forward, step_unitaries

__all__ = [
    "RESIDUAL_TOL",
    "PmpDiagnostics",
    "PmpReport",
    "costate_backward",
    "switching_functions",
    "pmp_residuals",
    "diagnose",
]

RESIDUAL_TOL = 1e-4


@dataclass(eq=False)
class PmpDiagnostics:
    times: np.ndarray  # step midpoints
    phi0: np.ndarray
    phi1: np.ndarray
    cham: np.ndarray
    xi: np.ndarray
    lambda_traj: Trajectory
    phi0_start: float
    phi0_end: float
    phi1_start: float
    phi1_end: float
    pairing: np.ndarray  # <lambda(t)|psi(t)> at grid nodes

    @property
    def pairing_drift(self) -> float:
        return float(np.max(np.abs(self.pairing - self.pairing[-1])))


@dataclass
class PmpReport:
    cham_mean: float
    cham_std: float
    tol: float
    consistent0: np.ndarray  # per-step bound/sign consistency flags
    consistent1: np.ndarray
    phi1_end: float
    phi0_start: float

    @property
    def all_consistent(self) -> bool:
        return bool(self.consistent0.all() and self.consistent1.all())

    @property
    def penalty_weight(self) -> float:
        """Measured constant of the control Hamiltonian.

        For a fixed-T optimum this is the time-penalty weight for which the
        same controls would be optimal in the free-final-time problem.
        """
        return self.cham_mean

    def summary(self) -> dict:
        return {
            "cham_mean": self.cham_mean,
            "cham_std": self.cham_std,
            "tol": self.tol,
            "fraction_consistent_eps0": float(self.consistent0.mean()),
            "fraction_consistent_eps1": float(self.consistent1.mean()),
            "all_consistent": self.all_consistent,
            "phi1_end": self.phi1_end,
            "phi0_start": self.phi0_start,
        }


def costate_backward(
    spec: ProtocolSpec,
    controls: ControlField,
    psi_T: np.ndarray,
    unitaries: np.ndarray | None = None,
) -> Trajectory:
    """Costate ``lambda(t)`` propagated back from ``O psi(T)``."""
    psi_T = np.asarray(psi_T, dtype=np.complex128)
    if psi_T.shape != (spec.dim,):
        raise ValueError(f"psi_T has shape {psi_T.shape}, expected ({spec.dim},)")
    U = step_unitaries(spec, controls) if unitaries is None else unitaries
    if U.shape[0] != controls.grid.n_steps:
        raise ValueError("step unitaries do not match the control grid")
    n = controls.grid.n_steps
    lam = np.empty((n + 1, spec.dim), dtype=np.complex128)
    lam[n] = spec.observable @ psi_T
    for i in range(n - 1, -1, -1):
        lam[i] = U[i].conj().T @ lam[i + 1]
    return Trajectory(controls.grid.edges, states=lam)


def _im2(a: np.ndarray, M: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 2 Im <a_i|M|b_i> for stacked vectors
    return 2.0 * np.einsum("ij,ij->i", a.conj(), b @ M.T).imag


def switching_functions(
    spec: ProtocolSpec,
    controls: ControlField,
    psi_traj: Trajectory,
    lambda_traj: Trajectory,
) -> PmpDiagnostics:
    n = controls.grid.n_steps
    psi = psi_traj.states
    lam = lambda_traj.states
    if psi is None or lam is None or psi.shape != lam.shape or psi.shape[0] != n + 1:
        raise ValueError("state and costate trajectories do not match the control grid")

    half = ControlField(controls.grid.refined(2), np.repeat(controls.eps0, 2), np.repeat(controls.eps1, 2))
    U_half = step_unitaries(spec, half)[0::2]
    psi_mid = np.einsum("nij,nj->ni", U_half, psi[:-1])
    lam_mid = np.einsum("nij,nj->ni", U_half, lam[:-1])

    phi0 = _im2(lam_mid, spec.H0, psi_mid)
    phi1 = _im2(lam_mid, spec.H1, psi_mid)
    # ordered so that d(Phi0 + Phi1)/dt = (eps0 - eps1) * xi
    C = commutator(spec.H0, spec.H1)
    xi = 2.0 * np.einsum("ij,ij->i", lam_mid.conj(), psi_mid @ C.T).real
    cham = controls.eps0 * phi0 + controls.eps1 * phi1

    def node(k, M):
        return float(2.0 * np.vdot(lam[k], M @ psi[k]).imag)

    pairing = np.einsum("ij,ij->i", lam.conj(), psi)
    return PmpDiagnostics(
        times=controls.grid.midpoints,
        phi0=phi0,
        phi1=phi1,
        cham=cham,
        xi=xi,
        lambda_traj=lambda_traj,
        phi0_start=node(0, spec.H0),
        phi0_end=node(n, spec.H0),
        phi1_start=node(0, spec.H1),
        phi1_end=node(n, spec.H1),
        pairing=pairing,
    )


def diagnose(spec: ProtocolSpec, controls: ControlField) -> tuple[PmpDiagnostics, Trajectory]:
    """Forward state, backward costate and switching functions in one call."""
    U = step_unitaries(spec, controls)
    psi_traj = evolve_forward(spec, controls, unitaries=U)
    lam = costate_backward(spec, controls, psi_traj.final, unitaries=U)
    return switching_functions(spec, controls, psi_traj, lam), psi_traj


def pmp_residuals(diag: PmpDiagnostics, controls: ControlField, tol: float = RESIDUAL_TOL) -> PmpReport:
    """Constancy of the control Hamiltonian and sign/bound consistency per step.

    For bounded controls: ``Phi_k > tol`` requires ``eps_k == 1``,
    ``Phi_k < -tol`` requires ``eps_k == 0`` and an interior ``eps_k`` requires
    ``|Phi_k| <= tol``. Unbounded controls require ``|Phi_k| <= tol``
    everywhere.
    """

    def flags(phi, eps):
        small = np.abs(phi) <= tol
        if not controls.bounded:
            return small
        return small | ((phi > tol) & (eps == 1.0)) | ((phi < -tol) & (eps == 0.0))

    return PmpReport(
        cham_mean=float(np.mean(diag.cham)),
        cham_std=float(np.std(diag.cham)),
        tol=tol,
        consistent0=flags(diag.phi0, controls.eps0),
        consistent1=flags(diag.phi1, controls.eps1),
        phi1_end=diag.phi1_end,
        phi0_start=diag.phi0_start,
    )
