"""Command-line front end.

Subcommands: optimize, sweep, robustness, qaoa, diagnose. Every subcommand
reads an optional TOML config (``--config``); unknown keys are rejected.
Exit codes: 0 success, 1 invalid configuration, 2 optimizer budget exhausted
(results are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import io
from .experiments import SCHEMES, RunSettings, run_scheme, sweep
from .metrics import cubic_fit_report, find_critical_time, robustness_scan
from .model import InputQubit, build_teleportation, error_channels
from .pmp import diagnose, pmp_residuals
from .propagate import ControlField, TimeGrid
from .qaoa import PsoConfig, pso_optimize, qaoa_to_controls
from .tbqcp import TbqcpConfig

log = logging.getLogger("twocontrol")

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2

SchemeName = Literal["Unlimited2", "Limited2", "LimitedSingle", "QAOA", "LAE"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProtocolSection(_Strict):
    a: tuple[float, float] = (1.0, 0.0)  # (re, im)
    b: tuple[float, float] = (0.0, 0.0)

    def input_qubit(self) -> InputQubit:
        return InputQubit(complex(*self.a), complex(*self.b))

    @model_validator(mode="after")
    def _normalized(self):
        self.input_qubit()
        return self


class GridSection(_Strict):
    steps_per_unit: int = Field(2000, ge=2)


class RunSection(_Strict):
    scheme: SchemeName = "Limited2"
    T: float = Field(1.0, gt=0)


class TbqcpSection(_Strict):
    eta: float = Field(5e-3, gt=0)
    max_iters: int = Field(2000, ge=1)
    clamp_mode: Literal["Project", "FreezeOnCross"] = "Project"
    convergence_tol: float = Field(1e-9, gt=0)
    patience: int = Field(10, ge=1)
    snapshot_every: int = Field(100, ge=1)


class PsoSection(_Strict):
    swarm_size: int = Field(50, ge=2)
    iterations: int = Field(300, ge=1)
    inertia: float = Field(0.7298, gt=0)
    cognitive: float = Field(1.4960, gt=0)
    social: float = Field(1.4960, gt=0)
    restarts: int = Field(8, ge=1)
    p_values: list[int] = [1, 2, 3, 4, 5, 6]

    @field_validator("p_values")
    @classmethod
    def _p_range(cls, v):
        if not v or any(p < 1 or p > 6 for p in v):
            raise ValueError("p_values must be a non-empty subset of 1..6")
        return v


class SweepSection(_Strict):
    T: list[float] = [round(0.1 * k, 10) for k in range(1, 21)]
    schemes: list[SchemeName] = list(SCHEMES)

    @field_validator("T")
    @classmethod
    def _positive(cls, v):
        if not v or any(t <= 0 for t in v):
            raise ValueError("sweep times must be positive")
        return v


class RobustnessSection(_Strict):
    T: float = Field(1.6, gt=0)
    alphas: list[float] = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]
    schemes: list[SchemeName] = ["Unlimited2", "Limited2", "LimitedSingle", "QAOA"]


class ExperimentConfig(_Strict):
    seed: int = 0
    workers: Optional[int] = Field(None, ge=1)
    out: str = "results"
    protocol: ProtocolSection = ProtocolSection()
    grid: GridSection = GridSection()
    run: RunSection = RunSection()
    tbqcp: TbqcpSection = TbqcpSection()
    pso: PsoSection = PsoSection()
    sweep: SweepSection = SweepSection()
    robustness: RobustnessSection = RobustnessSection()

    def settings(self) -> RunSettings:
        pso = self.pso.model_dump()
        p_values = tuple(pso.pop("p_values"))
        return RunSettings(
            tbqcp=TbqcpConfig(**self.tbqcp.model_dump()),
            pso=PsoConfig(rng_seed=self.seed, **pso),
            p_values=p_values,
            steps_per_unit=self.grid.steps_per_unit,
        )


class ConfigError(Exception):
    pass


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    raw: dict = {}
    if path is not None:
        try:
            raw = tomli.loads(Path(path).read_text())
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        lines = [f"{path or '<defaults>'}: invalid configuration"]
        for e in exc.errors():
            loc = ".".join(str(x) for x in e["loc"]) or "<root>"
            lines.append(f"  {loc}: {e['msg']}")
        raise ConfigError("\n".join(lines)) from None


def _tag(scheme: str, T: float) -> str:
    return f"{scheme}_T{T:.4f}"


def _write_controls(path, controls: ControlField):
    return io.write_csv(path, ["t", "eps0", "eps1"], [controls.grid.midpoints, controls.eps0, controls.eps1])


def _write_pmp(path, diag):
    return io.write_csv(
        path, ["t", "phi0", "phi1", "cham", "xi"], [diag.times, diag.phi0, diag.phi1, diag.cham, diag.xi]
    )


def _read_controls(path, T: float, bounded: bool) -> ControlField:
    data = io.read_csv(path)
    n = data["t"].size
    grid = TimeGrid(T, n)
    if not np.allclose(data["t"], grid.midpoints, rtol=0, atol=1e-9 * max(1.0, T)):
        raise ConfigError(f"{path}: time column does not match a uniform grid over [0, {T}]")
    return ControlField(grid, data["eps0"], data["eps1"], bounded=bounded)


def cmd_optimize(cfg: ExperimentConfig, out: Path) -> int:
    spec = build_teleportation(cfg.protocol.input_qubit())
    settings = cfg.settings()
    run = run_scheme(spec, cfg.run.scheme, cfg.run.T, settings)
    tag = _tag(run.scheme, run.T)
    _write_controls(out / f"{tag}_controls.csv", run.controls)
    diag, _ = diagnose(spec, run.controls)
    _write_pmp(out / f"{tag}_pmp.csv", diag)
    payload = dict(run.manifest, energy_cost=run.cost, fidelity=run.fidelity)
    payload["pmp"] = pmp_residuals(diag, run.controls).summary()
    payload["cubic_fit"] = [
        {"control": f.control, "start": f.start, "stop": f.stop, "r2": f.r2, "notice": f.notice}
        for f in cubic_fit_report(run.controls)
    ]
    opt = run.optimization
    if opt is not None:
        io.write_csv(out / f"{tag}_trace.csv", ["iter", "F"], [np.arange(opt.fidelity_trace.size), opt.fidelity_trace])
        snap_dir = out / f"{tag}_snapshots"
        snap_dir.mkdir(exist_ok=True)
        for it, (e0, e1) in sorted(opt.snapshots.items()):
            snap = ControlField(run.controls.grid, e0, e1)
            _write_controls(snap_dir / f"iter{it:05d}.csv", snap)
    io.write_manifest(out / f"{tag}_manifest.json", payload, cfg.model_dump())
    print(f"{run.scheme} T={run.T:g}: F = {run.fidelity:.6f}, energy cost = {run.cost:.6f}")
    if opt is not None and not opt.converged:
        print(f"  {opt.message}")
        return EXIT_BUDGET
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    spec = build_teleportation(cfg.protocol.input_qubit())
    Tc = find_critical_time(spec)
    res = sweep(spec, cfg.sweep.T, cfg.sweep.schemes, cfg.settings(), workers=cfg.workers, Tc=Tc)
    Ts = np.asarray(cfg.sweep.T, dtype=float)
    idx = {s: SCHEMES.index(s) + 1 for s in cfg.sweep.schemes}
    f_header, f_cols = ["T"], [Ts]
    c_header, c_cols = ["T"], [Ts]
    for s in cfg.sweep.schemes:
        f_header.append(f"F_scheme{idx[s]}")
        f_cols.append(res[s].F)
        c_header.append(f"Sigma_scheme{idx[s]}")
        c_cols.append(res[s].cost)
    f_header += ["F_doublebang_sim", "F_doublebang_formula"]
    f_cols += [res["DoubleBang"].F, res["DoubleBangFormula"].F]
    io.write_csv(out / "sweep_fidelity.csv", f_header, f_cols)
    io.write_csv(out / "sweep_cost.csv", c_header, c_cols)
    io.write_manifest(
        out / "sweep_manifest.json",
        {
            "Tc": Tc,
            "columns": {f"scheme{i}": s for s, i in idx.items()},
            "runs": {s: res[s].manifests for s in cfg.sweep.schemes},
        },
        cfg.model_dump(),
    )
    print(f"swept {len(Ts)} final times for {len(cfg.sweep.schemes)} schemes; Tc = {Tc:.4f}")
    return EXIT_OK


def cmd_robustness(cfg: ExperimentConfig, out: Path) -> int:
    spec = build_teleportation(cfg.protocol.input_qubit())
    T = cfg.robustness.T
    status = EXIT_OK
    summary = {}
    for scheme in cfg.robustness.schemes:
        path = out / f"{_tag(scheme, T)}_controls.csv"
        if path.exists():
            controls = _read_controls(path, T, bounded=scheme != "Unlimited2")
        else:
            sub = cfg.model_copy(update={"run": RunSection(scheme=scheme, T=T)})
            status = max(status, cmd_optimize(sub, out))
            controls = _read_controls(path, T, bounded=scheme != "Unlimited2")
        rep = robustness_scan(spec, controls, cfg.robustness.alphas)
        cols = [rep.alphas] + [rep.table[:, k] for k in range(rep.table.shape[1])] + [rep.worst]
        io.write_csv(out / f"robustness_{scheme}.csv", ["alpha"] + rep.labels + ["worst"], cols)
        summary[scheme] = {"baseline": rep.baseline, "worst": rep.worst, "worst_label": rep.worst_label}
        print(f"{scheme} T={T:g}: worst-case drop at alpha={rep.alphas[-1]:g} is {rep.worst_drop[-1]:.4f}")
    io.write_manifest(out / "robustness_manifest.json", summary, cfg.model_dump())
    return status


def cmd_qaoa(cfg: ExperimentConfig, out: Path) -> int:
    spec = build_teleportation(cfg.protocol.input_qubit())
    settings = cfg.settings()
    T = cfg.run.T
    grid = TimeGrid.for_time(T, settings.steps_per_unit)
    for p in settings.p_values:
        r = pso_optimize(spec, T, p, settings.pso)
        tag = f"QAOA_p{p}_T{T:.4f}"
        _write_controls(out / f"{tag}_controls.csv", qaoa_to_controls(r.params, grid))
        io.write_manifest(
            out / f"{tag}_params.json",
            {
                "p": p,
                "gammas": r.params.gammas,
                "betas": r.params.betas,
                "F": r.fidelity,
                "seed": settings.pso.rng_seed,
                "collapsed": r.collapsed,
            },
            cfg.model_dump(),
        )
        print(f"QAOA p={p} T={T:g}: F = {r.fidelity:.6f}")
    return EXIT_OK


def cmd_diagnose(cfg: ExperimentConfig, out: Path, controls_path: str | None = None) -> int:
    spec = build_teleportation(cfg.protocol.input_qubit())
    scheme, T = cfg.run.scheme, cfg.run.T
    if controls_path is not None:
        controls = _read_controls(controls_path, T, bounded=scheme != "Unlimited2")
    else:
        controls = run_scheme(spec, scheme, T, cfg.settings()).controls
    diag, psi = diagnose(spec, controls)
    rep = pmp_residuals(diag, controls)
    tag = _tag(scheme, T)
    _write_pmp(out / f"{tag}_pmp.csv", diag)
    io.write_manifest(
        out / f"{tag}_pmp_report.json",
        dict(rep.summary(), pairing_drift=diag.pairing_drift, phi0_end=diag.phi0_end, phi1_start=diag.phi1_start),
        cfg.model_dump(),
    )
    print(f"control Hamiltonian: mean {rep.cham_mean:.6g}, std {rep.cham_std:.3g}; consistent: {rep.all_consistent}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twocontrol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("optimize", "run one scheme at one final time"),
        ("sweep", "fidelity and energy cost over a range of final times"),
        ("robustness", "fidelity under single-Pauli systematic errors"),
        ("qaoa", "particle-swarm QAOA for each configured p"),
        ("diagnose", "Pontryagin switching-function diagnostics"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML experiment configuration")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
        p.add_argument("--workers", type=int, help="worker processes (overrides config)")
        if name == "diagnose":
            p.add_argument("--controls", help="controls CSV (t, eps0, eps1) to analyse instead of optimizing")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, {"out": args.out, "seed": args.seed, "workers": args.workers})
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "optimize":
            return cmd_optimize(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        if args.command == "robustness":
            return cmd_robustness(cfg, out)
        if args.command == "qaoa":
            return cmd_qaoa(cfg, out)
        return cmd_diagnose(cfg, out, args.controls)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
