"""Coupled field-medium marching in the co-moving frame.

Coordinates are xi = z (in sample lengths) and tau = t - z/c; in these
variables the one-way field equation is the quasi-static spatial ODE

    d Omega1 / d xi = -i alpha sigma_ba,            xi in [0, 1],

integrated with the trapezoidal rule from the boundary Omega1(0, tau).  Each
time step advances every cell's density matrix by one RK4 step with Omega1
frozen at its start-of-step profile (the controls are sampled at the RK4
stage times), then re-solves the field slice at the new time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import backend as _backend
from .errors import DivergenceError, ScenarioError
from .model import DARK_FIELD_THRESHOLD, GridSpec, Scenario, zeeman_detuning_shifts
from .polariton import FrameHistory, PolaritonFrame, dark_polariton, frame_history, z_polariton

__all__ = [
    "Grid",
    "Frame",
    "SimulationRecord",
    "field_slice",
    "run_simulation",
    "convergence_probe",
]

AB = 4  # index of the a-b coherence in the flat state layout
BB = 1
BC, BD = 7, 8


@dataclass(frozen=True)
class Grid:
    """Realized discretization: xi points on [0, 1] and the tau axis."""

    xi: np.ndarray
    d_tau: float
    n_tau: int

    @classmethod
    def from_spec(cls, spec: GridSpec) -> "Grid":
        return cls(
            xi=np.linspace(0.0, 1.0, spec.n_xi),
            d_tau=spec.d_tau,
            n_tau=spec.n_tau,
        )

    @property
    def tau(self) -> np.ndarray:
        return np.arange(self.n_tau + 1) * self.d_tau

    @property
    def d_xi(self) -> float:
        return float(self.xi[1] - self.xi[0])


@dataclass(frozen=True)
class Frame:
    """Full-grid snapshot at one tau: fields, state and polariton profiles."""

    tau: float
    omega1: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray
    z: np.ndarray
    theta: float
    phi: float
    chi: float
    chi2: float
    chi3: float
    omega2: complex
    omega3: complex
    omega_norm: float
    kappa: float
    is_dark: bool

    def polariton_frame(self) -> PolaritonFrame:
        return PolaritonFrame(
            theta=self.theta, phi=self.phi, chi2=self.chi2, chi3=self.chi3,
            chi=self.chi, omega_norm=self.omega_norm, kappa=self.kappa,
            is_dark=self.is_dark,
        )


@dataclass
class SimulationRecord:
    """Sampled fields and summary metrics of one run."""

    scenario: Scenario
    grid: Grid
    tau: np.ndarray
    input_series: np.ndarray
    boundary_series: np.ndarray
    excitation_series: np.ndarray
    snapshots: list[Frame]
    metrics: dict
    warnings: list[str] = field(default_factory=list)

    def snapshot_at(self, tau_value: float) -> Frame:
        best = min(self.snapshots, key=lambda f: abs(f.tau - tau_value))
        if abs(best.tau - tau_value) > 0.5 * self.grid.d_tau + 1e-12:
            raise KeyError(f"no snapshot stored at tau = {tau_value}")
        return best


def field_slice(sigma_ba: np.ndarray, boundary_value: complex, alpha: float,
                backend: str | None = None) -> np.ndarray:
    """Integrate the field along xi for one tau from the given coherences."""
    sigma_ba = np.asarray(sigma_ba, dtype=np.complex128)
    if sigma_ba.ndim != 1 or sigma_ba.shape[0] < 2:
        raise ValueError("sigma_ba must be a 1-d array with at least two points")
    if not np.all(np.isfinite(sigma_ba.view(np.float64))):
        raise DivergenceError("field_slice received non-finite coherences")
    kern = _backend.get_backend(backend)
    d_xi = 1.0 / (sigma_ba.shape[0] - 1)
    return kern.field_slice(sigma_ba, complex(boundary_value), float(alpha), d_xi)


# ---------------------------------------------------------------------------
# Scenario timeline analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Timeline:
    """Dark-interval bookkeeping derived from the scenario envelopes."""

    dark_start_idx: int | None
    dark_end_idx: int | None
    release_start_idx: int | None
    dark_reference_idx: int | None


def _analyze_timeline(scenario: Scenario, tau: np.ndarray, history: FrameHistory) -> _Timeline:
    total = np.maximum(np.abs(scenario.signal_value(tau)), history.omega_norm)
    dark = total < DARK_FIELD_THRESHOLD
    # Find maximal dark runs of meaningful length (>= 10 steps).
    runs: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(dark):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= 10:
                runs.append((start, i - 1))
            start = None
    if start is not None and len(dark) - start >= 10:
        runs.append((start, len(dark) - 1))
    if not runs:
        return _Timeline(None, None, None, None)
    s, e = runs[-1]
    release = e + 1 if e + 1 < len(dark) else None
    if scenario.magnetic is not None:
        mag_end_idx = round(scenario.magnetic.t_end / scenario.grid.d_tau)
        ref = (mag_end_idx + e) // 2
        ref = min(max(ref, mag_end_idx + 1), e)
    else:
        ref = (s + e) // 2
    return _Timeline(s, e, release, ref)


def _prepare_shift_arrays(scenario: Scenario, n_half: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sb = np.zeros(n_half)
    sc = np.zeros(n_half)
    sd = np.zeros(n_half)
    mag = scenario.magnetic
    if mag is not None and mag.b_field_tesla != 0.0:
        vb, vc, vd = zeeman_detuning_shifts(
            scenario.system.zeeman, mag.b_field_tesla, scenario.units
        )
        d_tau = scenario.grid.d_tau
        # The window is grid-aligned; membership is decided on half-step
        # indices with a half-open [start, end) convention so the RK4 stage
        # weights integrate the rectangular pulse area exactly.
        k_start = round(mag.t_start / d_tau)
        k_end = k_start + round(mag.duration / d_tau)
        j = np.arange(n_half)
        on = (j >= 2 * k_start) & (j < 2 * k_end)
        sb[on] = vb
        sc[on] = vc
        sd[on] = vd
    return sb, sc, sd


def _initial_sigma(n_xi: int) -> np.ndarray:
    sigma = np.zeros((n_xi, 10), dtype=np.complex128)
    sigma[:, BB] = 1.0
    return sigma


# ---------------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------------

def run_simulation(scenario: Scenario, backend: str | None = None) -> SimulationRecord:
    """Time-march the full storage / manipulation / release problem.

    The medium starts with all population in level b and no field inside.
    Deterministic: identical scenario and grid give bit-identical records
    for a given backend.
    """
    grid = Grid.from_spec(scenario.grid)
    tau = grid.tau
    n_tau = grid.n_tau
    d_tau = grid.d_tau
    sys = scenario.system

    warnings_list: list[str] = []
    # The explicit field-matter splitting rings (and eventually diverges) when
    # the per-step feedback gain alpha * d_tau grows too large; 20 is clean,
    # 40 marginal, 80 unstable for the reference parameter set.
    if scenario.coupling_alpha * d_tau > 25.0:
        warnings_list.append(
            f"alpha * d_tau = {scenario.coupling_alpha * d_tau:.1f} exceeds 25; "
            "the field-matter splitting may ring or diverge, reduce grid.d_tau"
        )

    boundary = np.asarray(scenario.signal_value(tau), dtype=np.complex128)
    tau_half = np.arange(2 * n_tau + 1) * (d_tau / 2.0)
    w2_half = np.asarray(scenario.control2_value(tau_half), dtype=np.complex128)
    w3_half = np.asarray(scenario.control3_value(tau_half), dtype=np.complex128)
    sb_half, sc_half, sd_half = _prepare_shift_arrays(scenario, tau_half.shape[0])

    history = frame_history(scenario, tau)
    timeline = _analyze_timeline(scenario, tau, history)

    snap_idx = {min(n_tau, max(0, round(t / d_tau))) for t in scenario.outputs.snapshot_times}
    snap_idx.add(n_tau)
    if timeline.dark_reference_idx is not None:
        snap_idx.add(timeline.dark_reference_idx)
    snap_steps = np.array(sorted(snap_idx), dtype=np.int64)

    kern = _backend.get_backend(backend)
    (exit_series, excitation, snaps_sigma, snaps_omega1,
     min_population, trace_error_max, diverged) = kern.march(
        _initial_sigma(scenario.grid.n_xi),
        boundary, w2_half, w3_half, sb_half, sc_half, sd_half,
        sys.gamma_ab, sys.gamma_ac, sys.gamma_ad,
        sys.delta1, sys.delta2, sys.delta3,
        scenario.coupling_alpha, d_tau, grid.d_xi, snap_steps,
    )
    if diverged >= 0:
        raise DivergenceError(
            f"simulation diverged at tau = {diverged * d_tau:.6g} (step {diverged}, "
            f"dt = {d_tau})"
        )

    chi2, chi3 = scenario.control_phases()
    frames: list[Frame] = []
    for k, step in enumerate(snap_steps):
        pframe = history.frame_at(int(step), chi2, chi3, sys.kappa)
        sigma_k = snaps_sigma[k]
        omega1_k = snaps_omega1[k]
        psi = dark_polariton(omega1_k, sigma_k[:, BC], sigma_k[:, BD], pframe)
        zz = z_polariton(sigma_k[:, BC], sigma_k[:, BD], pframe)
        frames.append(Frame(
            tau=float(tau[step]),
            omega1=omega1_k,
            sigma=sigma_k,
            psi=psi,
            z=zz,
            theta=pframe.theta,
            phi=pframe.phi,
            chi=pframe.chi,
            chi2=chi2,
            chi3=chi3,
            omega2=complex(history.omega2[step]),
            omega3=complex(history.omega3[step]),
            omega_norm=pframe.omega_norm,
            kappa=sys.kappa,
            is_dark=pframe.is_dark,
        ))

    record = SimulationRecord(
        scenario=scenario,
        grid=grid,
        tau=tau,
        input_series=boundary,
        boundary_series=exit_series,
        excitation_series=excitation,
        snapshots=frames,
        metrics={},
        warnings=warnings_list,
    )
    record.metrics = _compute_metrics(record, timeline, min_population, trace_error_max)
    return record


def _compute_metrics(record: SimulationRecord, timeline: _Timeline,
                     min_population: float, trace_error_max: float) -> dict:
    tau = record.tau
    d_tau = record.grid.d_tau
    abs_in = np.abs(record.input_series)
    abs_out = np.abs(record.boundary_series)

    input_peak = float(abs_in.max())
    input_peak_time = float(tau[int(abs_in.argmax())]) if input_peak > 0.0 else math.nan
    transmitted_peak = float(abs_out.max())
    group_delay = (
        float(tau[int(abs_out.argmax())] - input_peak_time)
        if input_peak > 0.0 and transmitted_peak > 0.0
        else math.nan
    )

    energy_in = float(np.trapezoid(abs_in**2, dx=d_tau))
    energy_out = float(np.trapezoid(abs_out**2, dx=d_tau))
    transmitted_fraction = energy_out / energy_in if energy_in > 0.0 else math.nan

    released_peak = math.nan
    release_time = math.nan
    stored_fraction = math.nan
    clipped = False
    if timeline.release_start_idx is not None:
        rs = timeline.release_start_idx
        seg = abs_out[rs:]
        released_peak = float(seg.max())
        release_time = float(tau[rs + int(seg.argmax())])
        leaked = float(np.trapezoid(abs_out[: rs + 1] ** 2, dx=d_tau))
        stored_fraction = 1.0 - leaked / energy_in if energy_in > 0.0 else math.nan
        if released_peak > 0.0 and abs_out[-1] > 0.01 * released_peak:
            clipped = True
            record.warnings.append(
                "released pulse clipped by t_final: exit amplitude still "
                f"{abs_out[-1] / released_peak:.1%} of the released peak"
            )

    stored_peak = math.nan
    coherence_scale_stored = math.nan
    dark_reference_tau = math.nan
    if timeline.dark_reference_idx is not None:
        dark_reference_tau = float(tau[timeline.dark_reference_idx])
        ref = record.snapshot_at(dark_reference_tau)
        stored_peak = float(np.abs(ref.psi).max())
        coherence_scale_stored = float(
            np.sqrt(np.abs(ref.sigma[:, BC]) ** 2 + np.abs(ref.sigma[:, BD]) ** 2).max()
        )

    final = record.snapshots[-1]
    z_peak_final = float(np.abs(final.z).max())

    return {
        "input_peak": input_peak,
        "input_peak_time": input_peak_time,
        "transmitted_peak": transmitted_peak,
        "group_delay": group_delay,
        "transmitted_fraction": transmitted_fraction,
        "stored_peak": stored_peak,
        "coherence_scale_stored": coherence_scale_stored,
        "released_peak": released_peak,
        "release_time": release_time,
        "stored_fraction": stored_fraction,
        "z_peak_final": z_peak_final,
        "dark_reference_tau": dark_reference_tau,
        "release_start_tau": (
            float(tau[timeline.release_start_idx])
            if timeline.release_start_idx is not None
            else math.nan
        ),
        "clipped_release": clipped,
        "min_population": float(min_population),
        "trace_error_max": float(trace_error_max),
    }


def convergence_probe(scenario: Scenario, factor: int, backend: str | None = None) -> float:
    """Relative change of the released peak under grid refinement.

    Reruns with n_xi and 1/d_tau scaled by ``factor`` and returns
    |peak_fine - peak_base| / peak_base, using the released peak when the
    scenario stores the pulse and the transmitted peak otherwise.
    """
    if factor not in (1, 2, 4):
        raise ScenarioError("refinement factor must be 1, 2 or 4")

    def peak_of(rec: SimulationRecord) -> float:
        value = rec.metrics["released_peak"]
        if math.isnan(value):
            value = rec.metrics["transmitted_peak"]
        if not value > 0.0:
            raise ScenarioError("convergence probe needs a nonzero output pulse")
        return value

    base = peak_of(run_simulation(scenario, backend=backend))
    if factor == 1:
        refined = peak_of(run_simulation(scenario, backend=backend))
    else:
        fine_grid = GridSpec(
            n_xi=scenario.grid.n_xi * factor,
            d_tau=scenario.grid.d_tau / factor,
            t_final=scenario.grid.t_final,
        )
        refined = peak_of(run_simulation(replace(scenario, grid=fine_grid), backend=backend))
    return abs(refined - base) / base
