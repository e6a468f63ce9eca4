"""Bounded two-control quantum annealing: optimizers, diagnostics, benchmarks."""

from .linalg import eig_hermitian, expm_unitary, pauli_embed
from .model import InputQubit, ProtocolSpec, build_error_hamiltonian, build_teleportation, total_hamiltonian
from .propagate import ControlField, TimeGrid, evolve_forward, evolve_observable_backward, fidelity
from .pmp import costate_backward, diagnose, pmp_residuals, switching_functions
from .tbqcp import ClampMode, Scheme, TbqcpConfig, tbqcp_iterate
from .qaoa import PsoConfig, QaoaParams, pso_optimize, qaoa_evolve, qaoa_to_controls
from .metrics import (
    cubic_fit_report,
    double_bang_curve,
    energy_cost,
    find_critical_time,
    robustness_scan,
)

__version__ = "0.1.0"
