"""Hamiltonians, states and observable of the three-qubit teleportation protocol.

Units: hbar = omega0 = 1, so energies are in hbar*omega0 and times in
tau0 = 1/omega0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian, is_hermitian, pauli_embed, projector

__all__ = [
    "BELL_PHI",
    "InputQubit",
    "ProtocolSpec",
    "build_teleportation",
    "build_error_hamiltonian",
    "error_channels",
    "total_hamiltonian",
]

BELL_PHI = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)

NORM_ATOL = 1e-12


@dataclass(frozen=True)
class InputQubit:
    """Unknown single-qubit state ``a|0> + b|1>`` carried by qubit 1."""

    a: complex = 1.0
    b: complex = 0.0

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"input qubit is not normalized: |a|^2+|b|^2 = {norm!r}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ProtocolSpec:
    """A two-Hamiltonian state transfer problem.

    ``H0`` is the driving Hamiltonian (its ground state is `psi0`), ``H1`` the
    problem Hamiltonian (its ground state is `target`), and `observable` is the
    projector onto `target` whose final expectation value is maximized.
    """

    n_qubits: int
    H0: np.ndarray
    H1: np.ndarray
    psi0: np.ndarray
    target: np.ndarray
    observable: np.ndarray

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    @classmethod
    def from_hamiltonians(cls, H0, H1, psi0, target, n_qubits: int | None = None) -> "ProtocolSpec":
        """Assemble a spec with ``observable = |target><target|``.

        No ground-state check is made here; see :meth:`check`.
        """
        H0 = np.asarray(H0, dtype=np.complex128)
        H1 = np.asarray(H1, dtype=np.complex128)
        psi0 = np.asarray(psi0, dtype=np.complex128)
        target = np.asarray(target, dtype=np.complex128)
        d = H0.shape[0]
        if H1.shape != H0.shape or psi0.shape != (d,) or target.shape != (d,):
            raise ValueError("dimension mismatch between Hamiltonians and states")
        for name, H in (("H0", H0), ("H1", H1)):
            if not is_hermitian(H):
                raise ValueError(f"{name} is not Hermitian")
        for name, v in (("psi0", psi0), ("target", target)):
            if abs(np.linalg.norm(v) - 1.0) > NORM_ATOL:
                raise ValueError(f"{name} is not normalized")
        if n_qubits is None:
            n_qubits = int(round(np.log2(d)))
        return cls(n_qubits, H0, H1, psi0, target, projector(target))

    def check(self, atol: float = 1e-10) -> None:
        """Assert the ground-state and projector invariants; raises ValueError."""
        for name, H, v in (("psi0", self.H0, self.psi0), ("target", self.H1, self.target)):
            e0 = eig_hermitian(H).eigenvalues[0]
            if np.linalg.norm(H @ v - e0 * v) > atol:
                raise ValueError(f"{name} is not in the ground subspace")
        O = self.observable
        if np.linalg.norm(O @ O - O) > atol or abs(np.trace(O) - 1) > atol:
            raise ValueError("observable is not a rank-1 projector")


def build_teleportation(input_qubit: InputQubit | None = None) -> ProtocolSpec:
    """Adiabatic gate teleportation of qubit 1 onto qubit 3.

    ``H0 = -(X2 X3 + Z2 Z3)`` and ``H1 = -(X1 X2 + Z1 Z2)``. The initial state
    is ``(a|0> + b|1>) (x) |Phi>`` and the target ``|Phi> (x) (a|0> + b|1>)``,
    with ``|Phi> = (|00> + |11>)/sqrt(2)``.
    """
    q = input_qubit if input_qubit is not None else InputQubit()
    p = lambda axis, j: pauli_embed(axis, j, 3)  # noqa: E731
    H0 = -(p("x", 2) @ p("x", 3) + p("z", 2) @ p("z", 3))
    H1 = -(p("x", 1) @ p("x", 2) + p("z", 1) @ p("z", 2))
    psi0 = np.kron(q.vector, BELL_PHI)
    target = np.kron(BELL_PHI, q.vector)
    return ProtocolSpec.from_hamiltonians(H0, H1, psi0, target, n_qubits=3)


def build_error_hamiltonian(axis: str, qubit: int, alpha: float, n_qubits: int = 3) -> np.ndarray:
    """Systematic local-field error ``alpha * sigma_axis`` on one qubit."""
    return alpha * pauli_embed(axis, qubit, n_qubits)


def error_channels(n_qubits: int = 3) -> list[tuple[str, int]]:
    """All single-Pauli error labels, ordered (x,1), (x,2), ..., (z,n)."""
    return [(axis, j) for axis in "xyz" for j in range(1, n_qubits + 1)]


def total_hamiltonian(spec: ProtocolSpec, eps0: float, eps1: float, err: np.ndarray | None = None) -> np.ndarray:
    H = eps0 * spec.H0 + eps1 * spec.H1
    if err is not None:
        err = np.asarray(err)
        if err.shape != H.shape:
            raise ValueError(f"error Hamiltonian has shape {err.shape}, expected {H.shape}")
        H = H + err
    return H
