"""Alternating-evolution (QAOA) ansatz under a fixed total time.

The ansatz applies ``exp(-i H1 gamma_1)`` first, then ``exp(-i H0 beta_1)``,
and so on for `p` blocks, with ``sum(gamma + beta) == T``. Durations are
searched with a particle swarm whose particles live on the scaled simplex.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian
from .model import ProtocolSpec
from .propagate import ControlField, TimeGrid

__all__ = [
    "QaoaParams",
    "PsoConfig",
    "PsoResult",
    "qaoa_evolve",
    "qaoa_fidelity_batch",
    "repair_to_simplex",
    "pso_optimize",
    "qaoa_to_controls",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QaoaParams:
    gammas: np.ndarray  # H1 durations
    betas: np.ndarray  # H0 durations

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if g.shape != b.shape or g.ndim != 1 or g.size < 1:
            raise ValueError("gammas and betas must be 1-D arrays of equal positive length")
        if np.any(g < 0) or np.any(b < 0):
            raise ValueError("QAOA durations must be nonnegative")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return self.gammas.size

    @property
    def total_time(self) -> float:
        return float(self.gammas.sum() + self.betas.sum())

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        """Inverse of :meth:`vector`: interleaved ``(gamma_1, beta_1, ...)``."""
        x = np.asarray(x, dtype=float)
        return cls(x[0::2], x[1::2])

    def vector(self) -> np.ndarray:
        x = np.empty(2 * self.p)
        x[0::2] = self.gammas
        x[1::2] = self.betas
        return x

    def durations(self) -> np.ndarray:
        """Block durations in application order, H1 first."""
        return self.vector()


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 50
    iterations: int = 300
    inertia: float = 0.7298
    cognitive: float = 1.4960
    social: float = 1.4960
    restarts: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.iterations < 1 or self.restarts < 1:
            raise ValueError("iterations and restarts must be >= 1")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("PSO coefficients must be positive")


@dataclass(eq=False)
class PsoResult:
    params: QaoaParams
    fidelity: float
    history: np.ndarray  # best-so-far fidelity per iteration, best restart
    restart_fidelities: np.ndarray
    collapsed: bool

    def __iter__(self):
        # allows ``params, F = pso_optimize(...)``
        return iter((self.params, self.fidelity))


class _BlockPropagator:
    """Exact block exponentials from one eigendecomposition per Hamiltonian."""

    def __init__(self, spec: ProtocolSpec):
        self.spec = spec
        self.dec = [eig_hermitian(spec.H1), eig_hermitian(spec.H0)]

    def apply(self, states: np.ndarray, which: int, durations: np.ndarray) -> np.ndarray:
        # states (m, d); durations (m,) ; which 0 -> H1, 1 -> H0
        dec = self.dec[which]
        V = dec.eigenvectors
        c = states @ V.conj()  # coefficients in eigenbasis, row-wise V^dagger psi
        c = c * np.exp(-1j * np.outer(durations, dec.eigenvalues))
        return c @ V.T

    def evolve(self, X: np.ndarray) -> np.ndarray:
        """Final states for a batch of interleaved duration vectors ``X`` (m, 2p)."""
        X = np.atleast_2d(X)
        states = np.broadcast_to(self.spec.psi0, (X.shape[0], self.spec.dim)).copy()
        for j in range(X.shape[1]):
            states = self.apply(states, j % 2, X[:, j])
        return states

    def fidelity(self, X: np.ndarray) -> np.ndarray:
        return np.abs(self.evolve(X) @ self.spec.target.conj()) ** 2


def qaoa_evolve(spec: ProtocolSpec, params: QaoaParams) -> np.ndarray:
    """State after the alternating sequence, using exact block exponentials."""
    return _BlockPropagator(spec).evolve(params.vector()[None, :])[0]


def qaoa_fidelity_batch(spec: ProtocolSpec, X: np.ndarray) -> np.ndarray:
    return _BlockPropagator(spec).fidelity(X)


def repair_to_simplex(X: np.ndarray, T: float) -> np.ndarray:
    """Clip negatives to zero and rescale each row to sum to `T`.

    Rows that clip to all zeros are reset to the uniform split. Rescaling
    rather than Euclidean projection keeps zero durations at exactly zero.
    """
    X = np.maximum(np.atleast_2d(np.asarray(X, dtype=float)), 0.0)
    m = X.max(axis=1)
    dead = m <= 0
    if np.any(dead):
        X[dead] = 1.0
        m[dead] = 1.0
    X = X / m[:, None]  # max entry becomes 1, so tiny rows cannot overflow
    X = X * (T / X.sum(axis=1))[:, None]
    # absorb the last rounding error into the largest entry
    rows = np.arange(X.shape[0])
    k = np.argmax(X, axis=1)
    X[rows, k] += T - X.sum(axis=1)
    return X


def _pso_run(prop: _BlockPropagator, T: float, dim: int, cfg: PsoConfig, rng: np.random.Generator):
    n = cfg.swarm_size
    x = rng.dirichlet(np.ones(dim), size=n) * T
    v = (rng.dirichlet(np.ones(dim), size=n) * T - x) * 0.5
    f = prop.fidelity(x)
    pbest, pbest_f = x.copy(), f.copy()
    g = int(np.argmax(f))
    gbest, gbest_f = x[g].copy(), float(f[g])
    history = np.empty(cfg.iterations)
    collapsed = False
    for it in range(cfg.iterations):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = cfg.inertia * v + cfg.cognitive * r1 * (pbest - x) + cfg.social * r2 * (gbest - x)
        x = repair_to_simplex(x + v, T)
        f = prop.fidelity(x)
        better = f > pbest_f
        pbest[better] = x[better]
        pbest_f[better] = f[better]
        g = int(np.argmax(pbest_f))
        if pbest_f[g] > gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
        history[it] = gbest_f
        if np.ptp(x, axis=0).max() < 1e-12:
            collapsed = True
            history[it + 1 :] = gbest_f
            break
    return gbest, gbest_f, history, collapsed


def pso_optimize(spec: ProtocolSpec, T: float, p: int, cfg: PsoConfig | None = None) -> PsoResult:
    """Maximize the fidelity over ``2p`` block durations summing to `T`.

    Runs ``cfg.restarts`` independent swarms with seeds spawned from
    ``cfg.rng_seed`` and keeps the best. Deterministic for a fixed seed.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    cfg = cfg or PsoConfig()
    prop = _BlockPropagator(spec)
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.restarts)
    best = None
    finals = []
    any_collapsed = False
    for ss in seeds:
        xb, fb, hist, collapsed = _pso_run(prop, T, 2 * p, cfg, np.random.default_rng(ss))
        finals.append(fb)
        if collapsed and hist.size and fb < 1 - 1e-6:
            any_collapsed = True
            log.info("swarm collapsed before the iteration budget (T=%g, p=%d)", T, p)
        if best is None or fb > best[1]:
            best = (xb, fb, hist)
    xb, fb, hist = best
    xb = repair_to_simplex(xb, T)[0]
    return PsoResult(
        params=QaoaParams.from_vector(xb),
        fidelity=float(prop.fidelity(xb[None, :])[0]),
        history=hist,
        restart_fidelities=np.asarray(finals),
        collapsed=any_collapsed,
    )


def qaoa_to_controls(params: QaoaParams, grid: TimeGrid) -> ControlField:
    """Sample the bang-bang schedule on `grid`.

    Block boundaries are rounded to the nearest grid edge; the last edge is
    pinned to T so the total duration is preserved. Blocks shorter than one
    step may vanish and are merged into their neighbours, which is logged.
    """
    if abs(params.total_time - grid.t_final) > 1e-9 * max(1.0, grid.t_final):
        raise ValueError(f"durations sum to {params.total_time}, grid spans {grid.t_final}")
    d = params.durations()
    edges = np.rint(np.concatenate([[0.0], np.cumsum(d)]) / grid.dt).astype(int)
    edges[-1] = grid.n_steps
    edges = np.clip(edges, 0, grid.n_steps)
    lost = [j for j in range(d.size) if edges[j + 1] <= edges[j] and d[j] > 0]
    if lost:
        log.warning("QAOA blocks %s are shorter than the grid step and were merged", lost)
    eps0 = np.zeros(grid.n_steps)
    for j in range(1, d.size, 2):  # odd positions are H0 blocks
        eps0[edges[j] : edges[j + 1]] = 1.0
    return ControlField(grid, eps0, 1.0 - eps0, bounded=True)
