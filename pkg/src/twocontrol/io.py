"""Plot-ready CSV and JSON writers with fixed formatting."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "{:.12e}"


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT.format(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header: list[str], columns) -> Path:
    """Write aligned columns with a header row, 12 significant digits."""
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    n = {c.shape[0] for c in cols}
    if len(n) != 1 or len(cols) != len(header):
        raise ValueError("columns must be aligned and match the header")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_cell(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float, encoding="utf-8")
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_manifest(path, payload: dict, config: dict | None = None) -> Path:
    path = Path(path)
    body = dict(_jsonable(payload))
    if config is not None:
        body["config"] = _jsonable(config)
        body["config_hash"] = config_hash(body["config"])
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_trajectory_csv(path, times, states) -> Path:
    """Columns t, re0, im0, re1, im1, ... for each amplitude."""
    states = np.asarray(states)
    header = ["t"]
    cols = [np.asarray(times)]
    for k in range(states.shape[1]):
        header += [f"re{k}", f"im{k}"]
        cols += [states[:, k].real, states[:, k].imag]
    return write_csv(path, header, cols)
