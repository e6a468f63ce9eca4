"""Run any of the five evolution schemes and sweep them over final times.

Scheme names:

* ``Unlimited2``: two independent controls, no amplitude bound (optimized)
* ``Limited2``: two independent controls in ``[0, 1]`` (optimized)
* ``LimitedSingle``: one control, ``eps1 = 1 - eps0`` in ``[0, 1]`` (optimized)
* ``QAOA``: alternating bang-bang blocks, durations found by particle swarm
* ``LAE``: linear ramp ``eps0 = 1 - t/T``, ``eps1 = t/T`` (not optimized)

``DoubleBang`` (both controls held at 1) is also accepted as a reference.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import SweepResult, double_bang_curve, energy_cost, robustness_scan
from .model import ProtocolSpec
from .propagate import STEPS_PER_UNIT, ControlField, TimeGrid, final_state, fidelity
from .qaoa import PsoConfig, pso_optimize, qaoa_to_controls
from .tbqcp import OptimizationResult, Scheme, TbqcpConfig, tbqcp_iterate

__all__ = [
    "SCHEMES",
    "RunSettings",
    "SchemeRun",
    "run_scheme",
    "sweep",
    "robustness_for_scheme",
]

SCHEMES = ("Unlimited2", "Limited2", "LimitedSingle", "QAOA", "LAE")
_REFERENCE = ("DoubleBang",)


@dataclass(frozen=True)
class RunSettings:
    tbqcp: TbqcpConfig = field(default_factory=TbqcpConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)
    p_values: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    steps_per_unit: int = STEPS_PER_UNIT


@dataclass(eq=False)
class SchemeRun:
    scheme: str
    T: float
    controls: ControlField
    fidelity: float
    cost: float
    converged: bool = True
    optimization: OptimizationResult | None = None
    manifest: dict = field(default_factory=dict)


def run_scheme(spec: ProtocolSpec, scheme: str, T: float, settings: RunSettings | None = None) -> SchemeRun:
    settings = settings or RunSettings()
    grid = TimeGrid.for_time(T, settings.steps_per_unit)
    manifest: dict = {"scheme": scheme, "T": float(T), "n_steps": grid.n_steps}

    if scheme in ("Unlimited2", "Limited2", "LimitedSingle"):
        cfg = replace(settings.tbqcp, scheme=Scheme(scheme))
        res = tbqcp_iterate(spec, cfg, grid)
        manifest.update(
            iterations_run=res.iterations_run,
            converged=res.converged,
            aborted=res.aborted,
            message=res.message,
            fidelity=res.fidelity,
        )
        return SchemeRun(
            scheme, T, res.controls, res.fidelity, energy_cost(res.controls, spec), res.converged, res, manifest
        )

    if scheme == "QAOA":
        per_p = {}
        best = None
        for p in settings.p_values:
            r = pso_optimize(spec, T, p, settings.pso)
            per_p[p] = r
            if best is None or r.fidelity > best.fidelity:
                best = r
        controls = qaoa_to_controls(best.params, grid)
        manifest.update(
            p=best.params.p,
            gammas=best.params.gammas,
            betas=best.params.betas,
            fidelity=best.fidelity,
            seed=settings.pso.rng_seed,
            per_p={str(p): r.fidelity for p, r in per_p.items()},
        )
        return SchemeRun(scheme, T, controls, best.fidelity, energy_cost(controls, spec), manifest=manifest)

    if scheme == "LAE":
        controls = ControlField.linear_ramp(grid)
    elif scheme == "DoubleBang":
        controls = ControlField.constant(grid, 1.0, 1.0, bounded=True)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES + _REFERENCE}")
    F = fidelity(final_state(spec, controls), spec.target)
    manifest["fidelity"] = F
    return SchemeRun(scheme, T, controls, F, energy_cost(controls, spec), manifest=manifest)


def _task(args):
    spec, scheme, T, settings = args
    run = run_scheme(spec, scheme, T, settings)
    run.optimization = None  # keep inter-process payload small
    return run


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks))


def sweep(
    spec: ProtocolSpec,
    Ts,
    schemes=SCHEMES,
    settings: RunSettings | None = None,
    workers: int | None = None,
    Tc: float | None = None,
) -> dict[str, SweepResult]:
    """Fidelity and energy cost of each scheme at each final time.

    Also returns a ``DoubleBang`` entry (simulated) and, when `Tc` is given,
    a ``DoubleBangFormula`` entry. Independent (scheme, T) runs are farmed
    out to a process pool; results are collected in input order so output is
    independent of scheduling.
    """
    settings = settings or RunSettings()
    Ts = [float(T) for T in Ts]
    if workers is None:
        workers = os.cpu_count() or 1
    names = list(schemes) + ["DoubleBang"]
    tasks = [(spec, s, T, settings) for s in names for T in Ts]
    runs = _map(tasks, workers)
    out = {}
    for k, s in enumerate(names):
        chunk = runs[k * len(Ts) : (k + 1) * len(Ts)]
        out[s] = SweepResult(
            s,
            np.array(Ts),
            np.array([r.fidelity for r in chunk]),
            np.array([r.cost for r in chunk]),
            [r.manifest for r in chunk],
        )
    if Tc is not None:
        out["DoubleBangFormula"] = SweepResult(
            "DoubleBangFormula", np.array(Ts), double_bang_curve(np.array(Ts), Tc), np.full(len(Ts), np.nan)
        )
    return out


def robustness_for_scheme(spec: ProtocolSpec, scheme: str, T: float, alphas, settings: RunSettings | None = None):
    run = run_scheme(spec, scheme, T, settings)
    return run, robustness_scan(spec, run.controls, alphas)
