"""Dark-state polariton and its orthogonal partner, angles, phases, residuals.

With Omega = sqrt(|Omega2|^2 + |Omega3|^2), the mixing angle obeys
tan(theta) = kappa / Omega and the branch angle tan(phi) = |Omega3| / |Omega2|.
The dark-state polariton

    Psi = exp(-i chi) [cos(theta) Omega1
                       - kappa sin(theta) (cos(phi) e^{i chi2} sigma_bc
                                           + sin(phi) e^{i chi3} sigma_bd)]

propagates at the reduced speed c cos^2(theta); the orthogonal coherence
superposition

    Z = sin(phi) e^{-i chi3} sigma_bc - cos(phi) e^{-i chi2} sigma_bd

never leaves the medium.  chi accumulates sin^2(theta) (cos^2(phi) chi2_dot +
sin^2(phi) chi3_dot) from zero at tau = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiagnosticsError
from .model import DARK_FIELD_THRESHOLD, Scenario

__all__ = [
    "PolaritonFrame",
    "PolaritonFields",
    "FrameHistory",
    "mixing_frame",
    "chi_rate",
    "dark_polariton",
    "z_polariton",
    "frame_history",
    "decoupling_residual",
]


@dataclass(frozen=True)
class PolaritonFrame:
    """Instantaneous mixing angles and phases of the polariton transformation.

    ``is_dark`` flags frames where the combined control amplitude is below
    the dark threshold, in which case ``phi`` carries the last defined value.
    """

    theta: float
    phi: float
    chi2: float
    chi3: float
    chi: float
    omega_norm: float
    kappa: float
    is_dark: bool = False


@dataclass(frozen=True)
class PolaritonFields:
    """Polariton profiles along xi at one sampled tau."""

    psi: np.ndarray
    z: np.ndarray
    frame: PolaritonFrame


def mixing_frame(
    omega2: complex,
    omega3: complex,
    kappa: float,
    chi_accumulated: float = 0.0,
    *,
    phi_fallback: float | None = None,
    chi2_fallback: float = 0.0,
    chi3_fallback: float = 0.0,
) -> PolaritonFrame:
    """Angles and phases from the instantaneous control fields.

    When both controls are off the branch angle is undefined as a ratio;
    ``phi_fallback`` (the last defined value) is used and the frame is
    flagged dark.  theta maps to pi/2 exactly in that limit.
    """
    if not kappa > 0.0:
        raise ValueError("kappa must be > 0")
    a2 = abs(omega2)
    a3 = abs(omega3)
    omega_norm = float(np.hypot(a2, a3))
    theta = float(np.arctan2(kappa, omega_norm))
    dark = omega_norm < DARK_FIELD_THRESHOLD
    if dark and phi_fallback is not None:
        phi = float(phi_fallback)
    else:
        phi = float(np.arctan2(a3, a2))
    chi2 = float(np.angle(omega2)) if a2 > 0.0 else chi2_fallback
    chi3 = float(np.angle(omega3)) if a3 > 0.0 else chi3_fallback
    return PolaritonFrame(
        theta=theta, phi=phi, chi2=chi2, chi3=chi3,
        chi=float(chi_accumulated), omega_norm=omega_norm, kappa=float(kappa),
        is_dark=bool(dark),
    )


def chi_rate(frame: PolaritonFrame, chi2_dot: float, chi3_dot: float) -> float:
    """sin^2(theta) (cos^2(phi) chi2_dot + sin^2(phi) chi3_dot)."""
    st2 = np.sin(frame.theta) ** 2
    return float(
        st2 * (np.cos(frame.phi) ** 2 * chi2_dot + np.sin(frame.phi) ** 2 * chi3_dot)
    )


def dark_polariton(omega1, coh_bc, coh_bd, frame: PolaritonFrame):
    """Dark-state polariton amplitude (scalar or along-xi arrays)."""
    cos_t = np.cos(frame.theta)
    sin_t = np.sin(frame.theta)
    atomic = (
        np.cos(frame.phi) * np.exp(1j * frame.chi2) * coh_bc
        + np.sin(frame.phi) * np.exp(1j * frame.chi3) * coh_bd
    )
    return np.exp(-1j * frame.chi) * (cos_t * omega1 - frame.kappa * sin_t * atomic)


def z_polariton(coh_bc, coh_bd, frame: PolaritonFrame):
    """Orthogonal polariton amplitude (scalar or along-xi arrays)."""
    return (
        np.sin(frame.phi) * np.exp(-1j * frame.chi3) * coh_bc
        - np.cos(frame.phi) * np.exp(-1j * frame.chi2) * coh_bd
    )


# ---------------------------------------------------------------------------
# Frame history over a full run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameHistory:
    """Mixing angles and phases sampled on a tau grid."""

    tau: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray
    omega_norm: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    chi: np.ndarray
    dark: np.ndarray

    def frame_at(self, index: int, chi2: float, chi3: float, kappa: float) -> PolaritonFrame:
        return PolaritonFrame(
            theta=float(self.theta[index]),
            phi=float(self.phi[index]),
            chi2=chi2,
            chi3=chi3,
            chi=float(self.chi[index]),
            omega_norm=float(self.omega_norm[index]),
            kappa=kappa,
            is_dark=bool(self.dark[index]),
        )


def _freeze_undefined(values: np.ndarray, defined: np.ndarray, fill: float) -> np.ndarray:
    """Forward-fill ``values`` where not ``defined``; backfill leading gaps."""
    if not defined.any():
        return np.full_like(values, fill)
    idx = np.maximum.accumulate(np.where(defined, np.arange(values.size), -1))
    head = values[np.argmax(defined)]
    return np.where(idx >= 0, values[np.maximum(idx, 0)], head)


def frame_history(scenario: Scenario, tau: np.ndarray) -> FrameHistory:
    """Mixing-frame quantities over the run from the scenario envelopes.

    phi is frozen at its last defined value through dark intervals, and chi
    is the trapezoid accumulation of the chi rate (identically zero for the
    constant control phases the scenario format allows).
    """
    w2 = np.asarray(scenario.control2_value(tau), dtype=np.complex128)
    w3 = np.asarray(scenario.control3_value(tau), dtype=np.complex128)
    a2 = np.abs(w2)
    a3 = np.abs(w3)
    omega_norm = np.hypot(a2, a3)
    kappa = scenario.system.kappa
    theta = np.arctan2(kappa, omega_norm)
    defined = omega_norm >= DARK_FIELD_THRESHOLD
    phi = _freeze_undefined(np.arctan2(a3, a2), defined, fill=0.0)

    # The scenario format only allows constant control phases, so chi2_dot =
    # chi3_dot = 0 and the trapezoid accumulation of the chi rate stays zero.
    chi_dot = np.zeros_like(omega_norm)
    chi = np.concatenate(
        ([0.0], np.cumsum(0.5 * (chi_dot[1:] + chi_dot[:-1]) * np.diff(tau)))
    )
    return FrameHistory(
        tau=np.asarray(tau, dtype=np.float64),
        omega2=w2,
        omega3=w3,
        omega_norm=omega_norm,
        theta=theta,
        phi=phi,
        chi=chi,
        dark=~defined,
    )


# ---------------------------------------------------------------------------
# Residuals of the two-polariton transport equations
# ---------------------------------------------------------------------------

def decoupling_residual(record, tau_window: tuple[float, float]) -> dict[str, float]:
    """Finite-difference residuals of the polariton transport pair.

    In the co-moving coordinates the pair reads

        sin^2(theta) dPsi/dtau + c cos^2(theta) dPsi/dxi
            = tan^2(theta) cos(theta) phi_dot Omega Z
        dZ/dtau = -cos(theta) phi_dot Psi / Omega

    Both sides are evaluated by centered differences on the record's
    snapshots inside ``tau_window``; residuals are normalized by the window
    maxima of |Psi| (field scale) and max(|Z|, |Psi|/kappa) (atomic scale).
    Where phi_dot = 0 the right-hand sides are taken as zero.  The
    ``*_decoupled`` entries repeat the evaluation with the couplings dropped,
    for reporting how badly a single-polariton picture fails.
    """
    frames = [f for f in record.snapshots if tau_window[0] <= f.tau <= tau_window[1]]
    if len(frames) < 3:
        raise DiagnosticsError(
            f"decoupling residual needs >= 3 snapshots in {tau_window}, found {len(frames)}"
        )
    taus = np.array([f.tau for f in frames])
    d_tau = np.diff(taus)
    if not np.allclose(d_tau, d_tau[0], rtol=1e-6, atol=1e-12):
        raise DiagnosticsError("snapshots in the window must be uniformly spaced")
    dt = float(d_tau[0])

    psi = np.stack([f.psi for f in frames])
    z = np.stack([f.z for f in frames])
    theta = np.array([f.theta for f in frames])
    phi = np.array([f.phi for f in frames])
    omega = np.array([f.omega_norm for f in frames])
    kappa = frames[0].kappa
    c_internal = record.scenario.c_internal
    n_xi = psi.shape[1]
    d_xi = 1.0 / (n_xi - 1)

    psi_t = (psi[2:] - psi[:-2]) / (2.0 * dt)
    z_t = (z[2:] - z[:-2]) / (2.0 * dt)
    psi_x = np.empty_like(psi[1:-1])
    psi_x[:, 1:-1] = (psi[1:-1, 2:] - psi[1:-1, :-2]) / (2.0 * d_xi)
    psi_x[:, 0] = (psi[1:-1, 1] - psi[1:-1, 0]) / d_xi
    psi_x[:, -1] = (psi[1:-1, -1] - psi[1:-1, -2]) / d_xi

    phi_dot = (phi[2:] - phi[:-2]) / (2.0 * dt)
    th = theta[1:-1]
    om = omega[1:-1]
    sin_t = np.sin(th)
    cos_t = np.cos(th)

    lhs_psi = sin_t[:, None] ** 2 * psi_t + (c_internal * cos_t[:, None] ** 2) * psi_x
    lhs_z = z_t

    coupling_on = np.abs(phi_dot) > 1e-12
    # tan^2(theta) cos(theta) = sin^2(theta) / cos(theta); cos(theta) -> 0 only
    # with the controls off, where phi_dot is zero and the coupling is off.
    safe_cos = np.where(cos_t == 0.0, 1.0, cos_t)
    factor_psi = np.where(coupling_on & (cos_t > 0.0),
                          sin_t**2 / safe_cos * phi_dot * om, 0.0)
    rhs_psi = factor_psi[:, None] * z[1:-1]
    safe_om = np.where(om >= DARK_FIELD_THRESHOLD, om, 1.0)
    factor_z = np.where(
        coupling_on & (om >= DARK_FIELD_THRESHOLD), -cos_t * phi_dot / safe_om, 0.0
    )
    rhs_z = factor_z[:, None] * psi[1:-1]

    psi_scale = max(float(np.abs(psi).max()), 1e-300)
    z_scale = max(float(np.abs(z).max()), psi_scale / kappa, 1e-300)

    residual_psi = float(np.abs(lhs_psi - rhs_psi).max()) / psi_scale
    residual_z = float(np.abs(lhs_z - rhs_z).max()) / z_scale
    residual_psi_decoupled = float(np.abs(lhs_psi).max()) / psi_scale
    residual_z_decoupled = float(np.abs(lhs_z).max()) / z_scale
    return {
        "residual_psi": residual_psi,
        "residual_z": residual_z,
        "residual_psi_decoupled": residual_psi_decoupled,
        "residual_z_decoupled": residual_z_decoupled,
    }
