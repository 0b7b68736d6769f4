"""Serialization of simulation records: CSV series, NDJSON snapshots, metrics.

All floats are written at full round-trip precision in a fixed order, so a
rerun of the same scenario produces byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..propagator import Frame, SimulationRecord
from .config import scenario_to_mapping

__all__ = ["write_outputs", "read_series_csv"]

_COHERENCE_NAMES = ("ab", "ac", "ad", "bc", "bd", "cd")


def _fmt(x: float) -> str:
    return repr(float(x))


def _boundary_csv(record: SimulationRecord) -> str:
    lines = ["tau_invGamma,re_omega1,im_omega1,abs_omega1"]
    for t, w in zip(record.tau, record.boundary_series):
        lines.append(f"{_fmt(t)},{_fmt(w.real)},{_fmt(w.imag)},{_fmt(abs(w))}")
    return "\n".join(lines) + "\n"


def _frame_object(frame: Frame, xi: np.ndarray) -> dict:
    obj: dict = {
        "tau": float(frame.tau),
        "xi": [float(x) for x in xi],
        "re_omega1": [float(v) for v in frame.omega1.real],
        "im_omega1": [float(v) for v in frame.omega1.imag],
    }
    for idx, name in enumerate(("pop_a", "pop_b", "pop_c", "pop_d")):
        obj[name] = [float(v) for v in frame.sigma[:, idx].real]
    for k, name in enumerate(_COHERENCE_NAMES):
        col = frame.sigma[:, 4 + k]
        obj[f"re_coh_{name}"] = [float(v) for v in col.real]
        obj[f"im_coh_{name}"] = [float(v) for v in col.imag]
    obj["re_psi"] = [float(v) for v in frame.psi.real]
    obj["im_psi"] = [float(v) for v in frame.psi.imag]
    obj["re_z"] = [float(v) for v in frame.z.real]
    obj["im_z"] = [float(v) for v in frame.z.imag]
    obj["theta"] = float(frame.theta)
    obj["phi"] = float(frame.phi)
    obj["chi"] = float(frame.chi)
    obj["is_dark"] = bool(frame.is_dark)
    return obj


def _json_safe(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_outputs(record: SimulationRecord, out_dir: str | Path) -> dict[str, Path]:
    """Write boundary.csv, snapshots.ndjson and metrics.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    boundary_path = out / "boundary.csv"
    boundary_path.write_text(_boundary_csv(record), encoding="utf-8")

    snapshots_path = out / "snapshots.ndjson"
    with snapshots_path.open("w", encoding="utf-8") as fh:
        for frame in record.snapshots:
            fh.write(json.dumps(_frame_object(frame, record.grid.xi)))
            fh.write("\n")

    metrics_path = out / "metrics.json"
    payload = {
        "metrics": _json_safe(record.metrics),
        "grid": {
            "n_xi": record.scenario.grid.n_xi,
            "d_tau": record.scenario.grid.d_tau,
            "t_final": record.scenario.grid.t_final,
            "n_tau": record.grid.n_tau,
        },
        "scenario": _json_safe(scenario_to_mapping(record.scenario)),
        "warnings": list(record.warnings),
    }
    metrics_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    return {"boundary": boundary_path, "snapshots": snapshots_path, "metrics": metrics_path}


def read_series_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by this package: (column names, data).

    Lines starting with ``#`` are skipped; empty fields read as NaN.
    """
    lines = [
        line for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    header = lines[0].split(",")
    rows = [
        [float(tok) if tok.strip() else math.nan for tok in line.split(",")]
        for line in lines[1:]
    ]
    return header, np.asarray(rows, dtype=np.float64)
