"""Parameter sweeps over magnetic phase area, induction, or release stagger.

Sweep values run concurrently in threads (the compiled kernels release the
GIL); each value gets an isolated output directory.  Results are assembled
in input order, so sequential and parallel sweeps write identical files.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from ..analytic import released_height_factor
from ..errors import ScenarioError
from ..model import MagneticPulse, Scenario, convert_units, magnetic_phase_area
from ..propagator import SimulationRecord, run_simulation
from .outputs import write_outputs

__all__ = ["SWEEP_PARAMETERS", "SweepSpec", "SweepRow", "SweepSummary", "run_sweep"]

SWEEP_PARAMETERS = ("delta", "b_field", "control3_lead")
THREADS_ENV = "TRIPODSIM_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: which knob, which values, over which base scenario."""

    parameter: str
    values: tuple[float, ...]
    base_scenario: Scenario
    outputs_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ScenarioError(
                f"unknown sweep parameter {self.parameter!r}; one of {SWEEP_PARAMETERS}"
            )
        if not self.values:
            raise ScenarioError("sweep needs at least one value")
        if not all(math.isfinite(v) for v in self.values):
            raise ScenarioError("sweep values must be finite")


@dataclass(frozen=True)
class SweepRow:
    value: float
    released_peak: float
    released_peak_ratio: float
    z_peak: float
    z_peak_ratio: float
    predicted_ratio: float
    deviation: float


@dataclass(frozen=True)
class SweepSummary:
    parameter: str
    rows: tuple[SweepRow, ...]

    def to_csv_text(self) -> str:
        lines = [
            f"# parameter = {self.parameter}",
            "value,released_peak,released_peak_ratio,z_peak,z_peak_ratio,"
            "predicted_ratio,deviation",
        ]
        for r in self.rows:
            lines.append(
                ",".join(
                    repr(float(v))
                    for v in (
                        r.value, r.released_peak, r.released_peak_ratio,
                        r.z_peak, r.z_peak_ratio, r.predicted_ratio, r.deviation,
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# Applying a parameter value to the base scenario
# ---------------------------------------------------------------------------

def _delta_to_tesla(scenario: Scenario, delta: float) -> float:
    if scenario.magnetic is None:
        raise ScenarioError("delta sweep needs a base scenario with a magnetic stage")
    probe = replace(scenario.magnetic, b_field_tesla=1.0)
    rate = magnetic_phase_area(replace(scenario, magnetic=probe)).delta_bc
    if rate == 0.0:
        raise ScenarioError("level scheme gives zero phase per tesla; cannot sweep delta")
    return delta / rate


def _with_release_lead(scenario: Scenario, lead_us: float) -> Scenario:
    if len(scenario.control3) < 2 or len(scenario.control2) < 2:
        raise ScenarioError(
            "control3_lead sweep needs controls with storage and release windows"
        )
    lead = convert_units(scenario.units, lead_us, "us", "1/Gamma")
    anchor = scenario.control2[-1].t_start
    release = replace(scenario.control3[-1], t_start=anchor - lead)
    return replace(scenario, control3=scenario.control3[:-1] + (release,))


def apply_parameter(scenario: Scenario, parameter: str, value: float) -> Scenario:
    if parameter == "delta":
        mag = replace(scenario.magnetic, b_field_tesla=_delta_to_tesla(scenario, value))
        return replace(scenario, magnetic=mag)
    if parameter == "b_field":
        if scenario.magnetic is None:
            raise ScenarioError("b_field sweep needs a base scenario with a magnetic stage")
        return replace(scenario, magnetic=replace(scenario.magnetic, b_field_tesla=value))
    if parameter == "control3_lead":
        return _with_release_lead(scenario, value)
    raise ScenarioError(f"unknown sweep parameter {parameter!r}")


def _release_phi(scenario: Scenario) -> float:
    a2 = scenario.control2[-1].amplitude
    a3 = scenario.control3[-1].amplitude
    return math.atan2(a3, a2)


def _predicted_ratio(scenario: Scenario, parameter: str, value: float) -> float:
    phi = _release_phi(scenario)
    if parameter == "delta":
        return released_height_factor(phi, value)
    if parameter == "b_field":
        mag = replace(scenario.magnetic, b_field_tesla=value)
        delta = magnetic_phase_area(replace(scenario, magnetic=mag)).delta_bc
        return released_height_factor(phi, delta)
    return math.nan  # no closed-form law for staggered release


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _max_workers(n_jobs: int, requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(n_jobs, os.cpu_count() or 1))


def run_sweep(
    spec: SweepSpec,
    backend: str | None = None,
    max_workers: int | None = None,
) -> tuple[SweepSummary, dict[float, SimulationRecord]]:
    """Run every sweep value plus an unmanipulated baseline.

    Released peaks are reported relative to the baseline (value 0) release;
    trapped-Z peaks relative to the largest Z in the sweep.  When an output
    directory is set, each run is written to its own subdirectory and the
    summary to ``summary.csv``.
    """
    base = spec.base_scenario
    jobs = [("baseline", 0.0)] + [(f"{spec.parameter}_{v:.6g}", v) for v in spec.values]
    # A zero value reproduces the baseline scenario exactly; run it once.
    scenarios = {
        label: apply_parameter(base, spec.parameter, v)
        for label, v in jobs
        if label == "baseline" or v != 0.0
    }

    workers = _max_workers(len(scenarios), max_workers)
    if workers == 1:
        records = {label: run_simulation(scn, backend=backend) for label, scn in scenarios.items()}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                label: pool.submit(run_simulation, scn, backend=backend)
                for label, scn in scenarios.items()
            }
            records = {label: fut.result() for label, fut in futures.items()}
    for label, v in jobs:
        if label not in records:
            records[label] = records["baseline"]

    baseline_peak = records["baseline"].metrics["released_peak"]
    value_records: dict[float, SimulationRecord] = {
        v: records[label] for label, v in jobs[1:]
    }
    z_peaks = {v: rec.metrics["z_peak_final"] for v, rec in value_records.items()}
    z_ref = max(z_peaks.values()) if z_peaks else math.nan

    rows = []
    for v, rec in value_records.items():
        released = rec.metrics["released_peak"]
        ratio = released / baseline_peak if baseline_peak and baseline_peak > 0.0 else math.nan
        z_ratio = z_peaks[v] / z_ref if z_ref and z_ref > 0.0 else 0.0
        predicted = _predicted_ratio(base, spec.parameter, v)
        rows.append(SweepRow(
            value=v,
            released_peak=released,
            released_peak_ratio=ratio,
            z_peak=z_peaks[v],
            z_peak_ratio=z_ratio,
            predicted_ratio=predicted,
            deviation=abs(ratio - predicted),
        ))
    summary = SweepSummary(parameter=spec.parameter, rows=tuple(rows))

    if spec.outputs_dir is not None:
        out = Path(spec.outputs_dir)
        for label, _ in jobs:
            write_outputs(records[label], out / label)
        summary.write(out / "summary.csv")
    return summary, value_records
