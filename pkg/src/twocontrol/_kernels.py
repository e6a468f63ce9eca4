"""Compiled inner loops for the iterative optimizer."""

import numba
import numpy as np

UNLIMITED2 = 0
LIMITED2 = 1
LIMITED_SINGLE = 2

PROJECT = 0
FREEZE_ON_CROSS = 1


@numba.njit(cache=True)
def step_unitary(e0, e1, H0, H1, dt):
    """exp(-i (e0 H0 + e1 H1) dt) by scaled Taylor series, exact to roundoff.

    Truncation is chosen so the remainder is below 1e-18 in the infinity
    norm; an eigendecomposition per step is several times slower at d=8.
    """
    d = H0.shape[0]
    A = (-1j * dt) * (e0 * H0 + e1 * H1)
    nrm = 0.0
    for r in range(d):
        s = 0.0
        for c in range(d):
            s += abs(A[r, c])
        nrm = max(nrm, s)
    squarings = 0
    while nrm > 0.5:
        nrm *= 0.5
        squarings += 1
    if squarings:
        A = A / (2.0 ** squarings)
    m = 1
    term = nrm
    while term > 1e-18 and m < 30:
        m += 1
        term = term * nrm / m
    eye = np.eye(d, dtype=np.complex128)
    U = eye + A / m
    for k in range(m - 1, 0, -1):
        U = eye + (A @ U) / k
    for _ in range(squarings):
        U = U @ U
    return U


@numba.njit(cache=True)
def backward_observable(O, U):
    n = U.shape[0]
    d = O.shape[0]
    out = np.empty((n + 1, d, d), dtype=np.complex128)
    out[n] = O
    for i in range(n - 1, -1, -1):
        out[i] = U[i].conj().T @ out[i + 1] @ U[i]
    return out


@numba.njit(cache=True)
def _clip(x):
    return min(max(x, 0.0), 1.0)


@numba.njit(cache=True)
def _bounded_update(e, df, frozen, mode):
    # frozen: 0 free, 1 pinned at the bound the sample last crossed
    if mode == FREEZE_ON_CROSS and frozen:
        return e, frozen
    new = e + df
    if new > 1.0:
        return 1.0, 1 if mode == FREEZE_ON_CROSS else 0
    if new < 0.0:
        return 0.0, 1 if mode == FREEZE_ON_CROSS else 0
    return new, 0


@numba.njit(cache=True)
def forward_sweep(e0, e1, frozen0, frozen1, H0, H1, psi0, O_nodes, V_old, dt, eta, scheme, mode):
    """One self-consistent forward sweep, updating controls in place.

    At step i the corrections are evaluated at the step midpoint from the
    current state and the previous iteration's observable (both carried to
    the midpoint with the previous half-step unitary `V_old[i]`). The step
    controls are then updated, clamped for bounded schemes, and the state is
    advanced with the new step unitary. Returns the final state, the
    corrections, and the new half-step and full-step unitaries.
    """
    n = e0.shape[0]
    d = psi0.shape[0]
    f0 = np.empty(n)
    f1 = np.empty(n)
    V = np.empty((n, d, d), dtype=np.complex128)
    U = np.empty((n, d, d), dtype=np.complex128)
    psi = psi0.copy()
    for i in range(n):
        Vi = V_old[i]
        mid = Vi @ psi
        # O(t_mid) psi_mid = V^dagger O(t_{i+1}) V V psi
        Omid = Vi.conj().T @ (O_nodes[i + 1] @ (Vi @ mid))
        # 2 Im <psi|O H_k|psi> = 2 Im <O psi|H_k psi>
        a = 2.0 * np.vdot(Omid, H0 @ mid).imag
        b = 2.0 * np.vdot(Omid, H1 @ mid).imag
        f0[i] = a
        f1[i] = b
        if scheme == UNLIMITED2:
            e0[i] += eta * a
            e1[i] += eta * b
        elif scheme == LIMITED2:
            e0[i], frozen0[i] = _bounded_update(e0[i], eta * a, frozen0[i], mode)
            e1[i], frozen1[i] = _bounded_update(e1[i], eta * b, frozen1[i], mode)
        else:
            e0[i], frozen0[i] = _bounded_update(e0[i], eta * (a - b), frozen0[i], mode)
            e1[i] = 1.0 - e0[i]
        V[i] = step_unitary(e0[i], e1[i], H0, H1, 0.5 * dt)
        U[i] = V[i] @ V[i]
        psi = U[i] @ psi
    return psi, f0, f1, V, U


@numba.njit(cache=True)
def half_steps(e0, e1, H0, H1, dt):
    n = e0.shape[0]
    d = H0.shape[0]
    V = np.empty((n, d, d), dtype=np.complex128)
    U = np.empty((n, d, d), dtype=np.complex128)
    for i in range(n):
        V[i] = step_unitary(e0[i], e1[i], H0, H1, 0.5 * dt)
        U[i] = V[i] @ V[i]
    return V, U
