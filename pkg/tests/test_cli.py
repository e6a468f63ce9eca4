import json
import subprocess
import sys

import numpy as np
import pytest

from twocontrol.cli import ConfigError, load_config, main
from twocontrol.io import config_hash, read_csv

TINY = """
seed = 3
workers = 1

[grid]
steps_per_unit = 100

[run]
scheme = "Limited2"
T = 0.8

[tbqcp]
max_iters = 15
snapshot_every = 5

[pso]
swarm_size = 10
iterations = 20
restarts = 2
p_values = [1, 2]

[sweep]
T = [0.5, 1.2]

[robustness]
T = 0.8
alphas = [0.0, 0.1]
schemes = ["Limited2"]
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(TINY)
    return path


def run(cfg_file, tmp_path, *args):
    out = tmp_path / "out"
    code = main([args[0], "--config", str(cfg_file), "--out", str(out), *args[1:]])
    return code, out


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.tbqcp.eta == 5e-3 and cfg.grid.steps_per_unit == 2000
        assert cfg.sweep.T[0] == 0.1 and cfg.sweep.T[-1] == 2.0 and len(cfg.sweep.T) == 20

    def test_overrides(self, cfg_file):
        cfg = load_config(cfg_file, {"seed": 9, "workers": None})
        assert cfg.seed == 9 and cfg.workers == 1
        assert cfg.settings().pso.rng_seed == 9

    @pytest.mark.parametrize(
        "text",
        [
            "bogus = 1",
            "[tbqcp]\neta = -1.0",
            "[tbqcp]\nunknown_knob = 2",
            "[run]\nscheme = 'Limited3'",
            "[pso]\np_values = [7]",
            "[protocol]\na = [1.0, 0.0]\nb = [1.0, 0.0]",
            "[sweep\nT = 1",
        ],
    )
    def test_rejected(self, tmp_path, text, capsys):
        path = tmp_path / "bad.toml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(path)
        assert main(["optimize", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
        assert "bad.toml" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["optimize", "--config", str(tmp_path / "nope.toml")]) == 1


def test_optimize_outputs(cfg_file, tmp_path):
    code, out = run(cfg_file, tmp_path, "optimize")
    assert code == 2  # 15 iterations do not converge
    tag = "Limited2_T0.8000"
    lines = (out / f"{tag}_controls.csv").read_text().splitlines()
    assert lines[0] == "t,eps0,eps1" and len(lines) == 81
    pmp = read_csv(out / f"{tag}_pmp.csv")
    assert list(pmp) == ["t", "phi0", "phi1", "cham", "xi"]
    trace = read_csv(out / f"{tag}_trace.csv")
    assert trace["F"].size == 16 and np.all(np.diff(trace["F"]) >= -1e-10)
    snaps = sorted(p.name for p in (out / f"{tag}_snapshots").iterdir())
    assert snaps == ["iter00000.csv", "iter00005.csv", "iter00010.csv", "iter00015.csv"]
    man = json.loads((out / f"{tag}_manifest.json").read_text())
    assert man["config_hash"] == config_hash(man["config"])
    assert man["iterations_run"] == 15 and not man["converged"]
    assert 0 < man["fidelity"] <= 1


def test_optimize_lae_exit_zero(cfg_file, tmp_path):
    cfg_file.write_text(TINY.replace('scheme = "Limited2"', 'scheme = "LAE"'))
    code, out = run(cfg_file, tmp_path, "optimize")
    assert code == 0
    assert (out / "LAE_T0.8000_controls.csv").exists()


def test_sweep_outputs(cfg_file, tmp_path):
    code, out = run(cfg_file, tmp_path, "sweep")
    assert code == 0
    F = read_csv(out / "sweep_fidelity.csv")
    assert list(F) == [
        "T",
        "F_scheme1",
        "F_scheme2",
        "F_scheme3",
        "F_scheme4",
        "F_scheme5",
        "F_doublebang_sim",
        "F_doublebang_formula",
    ]
    assert np.array_equal(F["T"], [0.5, 1.2])
    cost = read_csv(out / "sweep_cost.csv")
    assert list(cost)[1:] == [f"Sigma_scheme{k}" for k in range(1, 6)]
    man = json.loads((out / "sweep_manifest.json").read_text())
    assert man["columns"]["scheme4"] == "QAOA"


def test_robustness_reuses_controls(cfg_file, tmp_path):
    code, out = run(cfg_file, tmp_path, "robustness")
    assert code == 2  # the optimizer ran first with a short budget
    rob = read_csv(out / "robustness_Limited2.csv")
    assert list(rob) == ["alpha", "x1", "x2", "x3", "y1", "y2", "y3", "z1", "z2", "z3", "worst"]
    before = (out / "Limited2_T0.8000_manifest.json").stat().st_mtime_ns
    code, _ = run(cfg_file, tmp_path, "robustness")
    assert code == 0  # existing controls reused, no optimizer run
    assert (out / "Limited2_T0.8000_manifest.json").stat().st_mtime_ns == before


def test_qaoa_outputs(cfg_file, tmp_path):
    code, out = run(cfg_file, tmp_path, "qaoa")
    assert code == 0
    params = json.loads((out / "QAOA_p2_T0.8000_params.json").read_text())
    assert len(params["gammas"]) == 2 and sum(params["gammas"]) + sum(params["betas"]) == pytest.approx(0.8)
    assert params["seed"] == 3


def test_diagnose_from_controls(cfg_file, tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    t = (np.arange(80) + 0.5) / 100
    lines = ["t,eps0,eps1"] + [f"{x:.12e},1.0,1.0" for x in t]
    (out / "flat.csv").write_text("\n".join(lines) + "\n")
    code, _ = run(cfg_file, tmp_path, "diagnose", "--controls", str(out / "flat.csv"))
    assert code == 0
    rep = json.loads((out / "Limited2_T0.8000_pmp_report.json").read_text())
    assert rep["cham_std"] < 1e-10 and rep["pairing_drift"] < 1e-10


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twocontrol", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("optimize", "sweep", "robustness", "qaoa", "diagnose"):
        assert name in proc.stdout
