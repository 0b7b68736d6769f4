"""Density-matrix equations of motion and their fixed-step RK4 integration.

The ten stored components are the four populations and the six upper-triangle
coherences; the conjugate elements follow from Hermiticity.  Relaxation is
spontaneous emission out of the upper level a at partial rates Gamma_ab,
Gamma_ac, Gamma_ad (feeding b, c, d), optical coherences decay at half the
total rate, and the ground-state coherences are undamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .errors import DivergenceError
from .model import AtomicSystem, MagneticPhases, Scenario, magnetic_phase_area, \
    zeeman_detuning_shifts

__all__ = [
    "SigmaState",
    "FieldSample",
    "bloch_rhs",
    "rk4_step",
    "apply_phase_kick",
    "integrate_magnetic_stage",
    "magnetic_route_difference",
]

# Component order inside the flat (10,) representation.
COMPONENTS = ("aa", "bb", "cc", "dd", "ab", "ac", "ad", "bc", "bd", "cd")
AA, BB, CC, DD, AB, AC, AD, BC, BD, CD = range(10)


@dataclass(frozen=True)
class SigmaState:
    """Density-matrix components at one space-time point."""

    pop_a: float
    pop_b: float
    pop_c: float
    pop_d: float
    coh_ab: complex
    coh_ac: complex
    coh_ad: complex
    coh_bc: complex
    coh_bd: complex
    coh_cd: complex

    @classmethod
    def ground(cls) -> "SigmaState":
        """All population in level b."""
        return cls(0.0, 1.0, 0.0, 0.0, 0j, 0j, 0j, 0j, 0j, 0j)

    @classmethod
    def zero(cls) -> "SigmaState":
        return cls(0.0, 0.0, 0.0, 0.0, 0j, 0j, 0j, 0j, 0j, 0j)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "SigmaState":
        return cls(
            float(arr[AA].real), float(arr[BB].real), float(arr[CC].real), float(arr[DD].real),
            complex(arr[AB]), complex(arr[AC]), complex(arr[AD]),
            complex(arr[BC]), complex(arr[BD]), complex(arr[CD]),
        )

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.pop_a, self.pop_b, self.pop_c, self.pop_d,
             self.coh_ab, self.coh_ac, self.coh_ad,
             self.coh_bc, self.coh_bd, self.coh_cd],
            dtype=np.complex128,
        )

    @property
    def trace(self) -> float:
        return self.pop_a + self.pop_b + self.pop_c + self.pop_d

    @property
    def purity(self) -> float:
        """Tr(sigma^2) with the off-diagonal elements counted twice."""
        pops = self.pop_a**2 + self.pop_b**2 + self.pop_c**2 + self.pop_d**2
        cohs = sum(
            abs(c) ** 2
            for c in (self.coh_ab, self.coh_ac, self.coh_ad,
                      self.coh_bc, self.coh_bd, self.coh_cd)
        )
        return pops + 2.0 * cohs


@dataclass(frozen=True)
class FieldSample:
    """Instantaneous driving fields and Zeeman detuning corrections [Gamma].

    The shifts are (E_b - E_a, E_c - E_a, E_d - E_a) and are zero outside the
    magnetic stage.
    """

    omega1: complex = 0j
    omega2: complex = 0j
    omega3: complex = 0j
    detuning_shift_b: float = 0.0
    detuning_shift_c: float = 0.0
    detuning_shift_d: float = 0.0


def _kernels(name: str | None = None):
    return _backend.get_backend(name)


def bloch_rhs(state: SigmaState, fields: FieldSample, system: AtomicSystem,
              backend: str | None = None) -> SigmaState:
    """Time derivative d sigma / d tau at the given fields."""
    kern = _kernels(backend)
    sigma = state.to_array()[np.newaxis, :]
    omega1 = np.array([fields.omega1], dtype=np.complex128)
    out = kern.bloch_rhs(
        sigma, omega1, fields.omega2, fields.omega3,
        fields.detuning_shift_b, fields.detuning_shift_c, fields.detuning_shift_d,
        system.gamma_ab, system.gamma_ac, system.gamma_ad,
        system.delta1, system.delta2, system.delta3,
    )
    return SigmaState.from_array(out[0])


def rk4_step(
    state: SigmaState,
    fields_start: FieldSample,
    fields_mid: FieldSample,
    fields_end: FieldSample,
    system: AtomicSystem,
    dt: float,
    t: float = math.nan,
    backend: str | None = None,
) -> SigmaState:
    """One classical RK4 step with fields sampled at t, t + dt/2 and t + dt."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")

    def deriv(s: np.ndarray, f: FieldSample) -> np.ndarray:
        kern = _kernels(backend)
        return kern.bloch_rhs(
            s[np.newaxis, :], np.array([f.omega1], dtype=np.complex128),
            f.omega2, f.omega3,
            f.detuning_shift_b, f.detuning_shift_c, f.detuning_shift_d,
            system.gamma_ab, system.gamma_ac, system.gamma_ad,
            system.delta1, system.delta2, system.delta3,
        )[0]

    s0 = state.to_array()
    k1 = deriv(s0, fields_start)
    k2 = deriv(s0 + (0.5 * dt) * k1, fields_mid)
    k3 = deriv(s0 + (0.5 * dt) * k2, fields_mid)
    k4 = deriv(s0 + dt * k3, fields_end)
    out = s0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out.view(np.float64))):
        raise DivergenceError(
            f"RK4 step diverged: non-finite state at t = {t} with dt = {dt}"
        )
    return SigmaState.from_array(out)


# ---------------------------------------------------------------------------
# Magnetic stage: grid integration versus analytic phase kick
# ---------------------------------------------------------------------------

def apply_phase_kick(sigma_field: np.ndarray, phases: MagneticPhases) -> np.ndarray:
    """Analytic effect of the magnetic stage on a dark atomic state.

    Multiplies the ground coherences of every cell by the accumulated phase
    factors (bc by exp(i delta_bc), bd by exp(i delta_bd), cd by
    exp(i delta_cd)); populations are untouched.  Valid only while all
    optical fields are off, which also keeps the optical coherences at zero.
    """
    out = np.array(sigma_field, dtype=np.complex128, copy=True)
    out[..., BC] *= np.exp(1j * phases.delta_bc)
    out[..., BD] *= np.exp(1j * phases.delta_bd)
    out[..., CD] *= np.exp(1j * phases.delta_cd)
    return out


def integrate_magnetic_stage(
    sigma_field: np.ndarray,
    scenario: Scenario,
    backend: str | None = None,
) -> np.ndarray:
    """Full equations of motion over the magnetic window, optical fields off.

    Integrates with the scenario's time step and Zeeman-shifted detunings;
    this is the same path the simulator takes through the window and must
    agree with :func:`apply_phase_kick` to high accuracy.
    """
    if scenario.magnetic is None:
        raise ValueError("scenario has no magnetic stage")
    kern = _kernels(backend)
    sb, sc, sd = zeeman_detuning_shifts(
        scenario.system.zeeman, scenario.magnetic.b_field_tesla, scenario.units
    )
    d_tau = scenario.grid.d_tau
    n_steps = round(scenario.magnetic.duration / d_tau)
    sys = scenario.system
    sigma = np.array(sigma_field, dtype=np.complex128, copy=True)
    if sigma.ndim == 1:
        sigma = sigma[np.newaxis, :]
    omega1 = np.zeros(sigma.shape[0], dtype=np.complex128)
    zeros3 = np.zeros(3, dtype=np.complex128)
    sb3 = np.full(3, sb)
    sc3 = np.full(3, sc)
    sd3 = np.full(3, sd)
    for _ in range(n_steps):
        sigma = kern.rk4_step_cells(
            sigma, omega1, zeros3, zeros3, sb3, sc3, sd3,
            sys.gamma_ab, sys.gamma_ac, sys.gamma_ad,
            sys.delta1, sys.delta2, sys.delta3, d_tau,
        )
    return sigma.reshape(np.shape(sigma_field))


def magnetic_route_difference(
    sigma_field: np.ndarray,
    scenario: Scenario,
    backend: str | None = None,
) -> float:
    """Max absolute component difference between the two magnetic-stage routes."""
    full = integrate_magnetic_stage(sigma_field, scenario, backend=backend)
    kick = apply_phase_kick(sigma_field, magnetic_phase_area(scenario))
    return float(np.abs(full - kick).max())
