"""Closed-form layer: coherence splitting at release and transport predictions.

A pulse stored with proportional controls satisfies sigma_bd = tan(phi)
sigma_bc cell by cell.  A diagonal phase kick exp(i delta) applied to
sigma_bc alone splits each coherence into a releasable part (aligned with
the dark-state polariton of the release controls) and a trapped part
(aligned with the orthogonal polariton Z):

    sigma_bc'' = sin^2(phi) (e^{i delta} - 1) sigma_bc0        (trapped)
    sigma_bd'' = -cos^2(phi) (e^{i delta} - 1) sigma_bd0       (trapped)
    sigma'     = sigma0 (cos^2(phi) e^{i delta} + sin^2(phi))  (released)

so the released pulse height scales by |cos^2(phi) e^{i delta} + sin^2(phi)|
= sqrt(1 - sin^2(2 phi) sin^2(delta/2)) and the trapped Z amplitude by
2 sin(phi) |sin(delta/2)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DiagnosticsError, StorageConditionError

__all__ = [
    "CoherenceSplit",
    "split_coherences",
    "released_height_factor",
    "trapped_z_amplitude",
    "PredictedRelease",
    "released_pulse_prediction",
    "adiabatic_check",
]

STORAGE_CONDITION_TOL = 1.0e-6


@dataclass(frozen=True)
class CoherenceSplit:
    """Releasable (prime) and trapped (double-prime) coherence parts."""

    sigma_bc_prime: complex | np.ndarray
    sigma_bd_prime: complex | np.ndarray
    sigma_bc_dprime: complex | np.ndarray
    sigma_bd_dprime: complex | np.ndarray

    @property
    def sigma_bc_total(self):
        return self.sigma_bc_prime + self.sigma_bc_dprime

    @property
    def sigma_bd_total(self):
        return self.sigma_bd_prime + self.sigma_bd_dprime


def _check_storage_condition(sigma_bc0, sigma_bd0, phi: float) -> None:
    # Written as cos(phi) sigma_bd0 = sin(phi) sigma_bc0 so phi = pi/2 stays valid.
    lhs = np.cos(phi) * np.asarray(sigma_bd0)
    rhs = np.sin(phi) * np.asarray(sigma_bc0)
    scale = max(float(np.abs(sigma_bc0).max() if np.ndim(sigma_bc0) else abs(sigma_bc0)),
                float(np.abs(sigma_bd0).max() if np.ndim(sigma_bd0) else abs(sigma_bd0)),
                1e-300)
    worst = float(np.abs(lhs - rhs).max() if np.ndim(lhs) else abs(lhs - rhs))
    if worst > STORAGE_CONDITION_TOL * scale:
        raise StorageConditionError(
            "coherences are not proportionally stored: "
            f"|cos(phi) sigma_bd - sin(phi) sigma_bc| = {worst:.3e} "
            f"exceeds {STORAGE_CONDITION_TOL:.0e} of the coherence scale {scale:.3e}"
        )


def split_coherences(sigma_bc0, sigma_bd0, phi: float, delta: float) -> CoherenceSplit:
    """Split proportionally stored coherences after a phase kick of area delta.

    Accepts scalars or along-xi arrays.  Raises
    :class:`StorageConditionError` when sigma_bd0 deviates from
    tan(phi) sigma_bc0 by more than 1e-6 of the coherence scale.
    """
    _check_storage_condition(sigma_bc0, sigma_bd0, phi)
    cos2 = math.cos(phi) ** 2
    sin2 = math.sin(phi) ** 2
    kick = np.exp(1j * delta)
    released_factor = cos2 * kick + sin2
    return CoherenceSplit(
        sigma_bc_prime=sigma_bc0 * released_factor,
        sigma_bd_prime=sigma_bd0 * released_factor,
        sigma_bc_dprime=sin2 * (kick - 1.0) * sigma_bc0,
        sigma_bd_dprime=-cos2 * (kick - 1.0) * sigma_bd0,
    )


def released_height_factor(phi: float, delta: float) -> float:
    """Released-pulse height relative to the unmanipulated release, in [0, 1]."""
    return float(abs(math.cos(phi) ** 2 * np.exp(1j * delta) + math.sin(phi) ** 2))


def trapped_z_amplitude(sigma_bc0, phi: float, delta: float):
    """Orthogonal-polariton amplitude left in the medium after release.

    Assumes the storage condition (sigma_bd0 = tan(phi) sigma_bc0); reduces
    to sin(phi) (e^{i delta} - 1) sigma_bc0, of magnitude
    2 sin(phi) |sin(delta/2)| |sigma_bc0|.
    """
    return math.sin(phi) * (np.exp(1j * delta) - 1.0) * sigma_bc0


# ---------------------------------------------------------------------------
# Released-pulse transport prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictedRelease:
    """Predicted exit time series of the released pulse."""

    tau: np.ndarray
    omega1: np.ndarray
    displacement: np.ndarray
    clipped: bool


def released_pulse_prediction(
    xi: np.ndarray,
    psi_profile: np.ndarray,
    tau: np.ndarray,
    theta: np.ndarray,
    c_internal: float,
) -> PredictedRelease:
    """Exit series from rigid transport of the stored polariton profile.

    The profile moves by the cumulative integral of c cos^2(theta) and the
    field amplitude is Psi cos(theta); the exit series reads the translated
    profile at xi = 1.  ``clipped`` flags a profile whose support has not
    fully left the medium by the end of the theta history.
    """
    xi = np.asarray(xi, dtype=np.float64)
    psi = np.asarray(psi_profile, dtype=np.complex128)
    tau = np.asarray(tau, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if xi.shape != psi.shape or tau.shape != theta.shape:
        raise ValueError("profile and history arrays must have matching shapes")

    speed = c_internal * np.cos(theta) ** 2
    disp = np.concatenate(([0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(tau))))

    source = 1.0 - disp
    out = np.where(
        (source >= xi[0]) & (source <= xi[-1]),
        np.interp(source, xi, psi.real) + 1j * np.interp(source, xi, psi.imag),
        0.0,
    )
    omega1 = np.cos(theta) * out

    peak = float(np.abs(psi).max())
    clipped = False
    if peak > 0.0:
        support = xi[np.abs(psi) > 1e-3 * peak]
        if support.size and disp[-1] < 1.0 - float(support.min()):
            clipped = True
    return PredictedRelease(tau=tau, omega1=omega1, displacement=disp, clipped=clipped)


# ---------------------------------------------------------------------------
# Adiabatic reduced-model residuals
# ---------------------------------------------------------------------------

def adiabatic_check(record, control_threshold: float = 1.0e-3) -> dict[str, float]:
    """Residuals of the adiabatic relations on simulation snapshots.

    Wherever both controls exceed ``control_threshold`` [Gamma] the reduced
    model requires Omega1 = -Omega2 sigma_bc - Omega3 sigma_bd and equal
    normalized coherence rates sigma_bc_dot / conj(Omega2) =
    sigma_bd_dot / conj(Omega3).  Returns the maxima of both residuals,
    normalized by the window's field and rate scales.
    """
    frames = [
        f for f in record.snapshots
        if abs(f.omega2) > control_threshold and abs(f.omega3) > control_threshold
    ]
    if len(frames) < 3:
        raise DiagnosticsError(
            "no qualifying window: need >= 3 snapshots with both controls above "
            f"{control_threshold} Gamma"
        )
    taus = np.array([f.tau for f in frames])
    gaps = np.diff(taus)
    if not np.allclose(gaps, gaps[0], rtol=1e-6, atol=1e-12):
        raise DiagnosticsError("qualifying snapshots must be uniformly spaced")
    dt = float(gaps[0])

    omega1 = np.stack([f.omega1 for f in frames])
    bc = np.stack([f.sigma[:, 7] for f in frames])
    bd = np.stack([f.sigma[:, 8] for f in frames])
    w2 = np.array([f.omega2 for f in frames])
    w3 = np.array([f.omega3 for f in frames])

    reconstructed = -(w2[:, None] * bc + w3[:, None] * bd)
    field_scale = max(float(np.abs(omega1).max()), 1e-300)
    omega1_residual = float(np.abs(omega1 - reconstructed).max()) / field_scale

    bc_dot = (bc[2:] - bc[:-2]) / (2.0 * dt)
    bd_dot = (bd[2:] - bd[:-2]) / (2.0 * dt)
    r2 = bc_dot / np.conj(w2[1:-1, None])
    r3 = bd_dot / np.conj(w3[1:-1, None])
    rate_scale = max(float(np.abs(r2).max()), float(np.abs(r3).max()), 1e-300)
    rate_match_residual = float(np.abs(r2 - r3).max()) / rate_scale

    return {
        "omega1_residual": omega1_residual,
        "rate_match_residual": rate_match_residual,
    }
