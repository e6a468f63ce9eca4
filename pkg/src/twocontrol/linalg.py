"""Dense complex linear algebra for small qubit registers.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``. The
register dimension in this package is 8, so dense ``O(d^3)`` operations are
used throughout and no sparsity is exploited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITIAN_ATOL",
    "PAULI",
    "EigenDecomposition",
    "pauli_embed",
    "is_hermitian",
    "hermitize",
    "eig_hermitian",
    "expm_unitary",
    "frobenius_norm",
    "commutator",
    "projector",
]

HERMITIAN_ATOL = 1e-12

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (d,)
        Real eigenvalues in ascending order.
    eigenvectors : ndarray, shape (d, d)
        Unitary matrix whose columns are the eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def ground_subspace(self, atol: float = 1e-9) -> np.ndarray:
        """Columns spanning the lowest eigenspace (degeneracy within `atol`)."""
        w = self.eigenvalues
        return self.eigenvectors[:, np.abs(w - w[0]) <= atol]


def pauli_embed(axis: str, qubit: int, n_qubits: int) -> np.ndarray:
    """Pauli matrix ``axis`` acting on ``qubit`` (1-based) of an n-qubit register.

    Qubit 1 is the leftmost (most significant) tensor factor.
    """
    try:
        sigma = PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of x, y, z") from None
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"qubit index {qubit} out of range 1..{n_qubits}")
    out = np.ones((1, 1), dtype=np.complex128)
    for j in range(1, n_qubits + 1):
        out = np.kron(out, sigma if j == qubit else np.eye(2, dtype=np.complex128))
    return out


def is_hermitian(H: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and np.allclose(H, H.conj().T, rtol=0.0, atol=atol)


def hermitize(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=np.complex128)
    return 0.5 * (H + H.conj().T)


def eig_hermitian(H: np.ndarray, atol: float = HERMITIAN_ATOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized before calling LAPACK so that roundoff
    asymmetry below `atol` never leaks into the eigenvectors.

    Raises
    ------
    ValueError
        If `H` is not square or not Hermitian within `atol`.
    """
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H, atol):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, V = np.linalg.eigh(hermitize(H))
    return EigenDecomposition(eigenvalues=w, eigenvectors=V)


def expm_unitary(H: np.ndarray, dt: float) -> np.ndarray:
    """Return ``exp(-i H dt)`` for Hermitian `H`, via its eigendecomposition."""
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    dec = eig_hermitian(H)
    V = dec.eigenvectors
    return (V * np.exp(-1j * dec.eigenvalues * dt)) @ V.conj().T


def frobenius_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, "fro"))


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())
