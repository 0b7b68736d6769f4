"""Equations of motion, RK4 oracles and the magnetic-stage dual routes."""

import math

import numpy as np
import pytest

import tripodsim as ts
from tripodsim.bloch import BC, BD, FieldSample, SigmaState, bloch_rhs, rk4_step
from tripodsim.errors import DivergenceError
from tripodsim.model import zeeman_detuning_shifts


def lossless_system() -> ts.AtomicSystem:
    return ts.AtomicSystem(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, kappa=1.0)


def reference_system() -> ts.AtomicSystem:
    return ts.AtomicSystem(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, kappa=1.0)


class TestBlochRhs:
    def test_everything_off_gives_zero_derivative(self):
        state = SigmaState(0.2, 0.3, 0.25, 0.25, 0.1j, 0.05, -0.02j, 0.01, 0.02, 0.03)
        d = bloch_rhs(state, FieldSample(), lossless_system())
        assert d.to_array() == pytest.approx(np.zeros(10))

    def test_relaxation_only(self):
        state = SigmaState(1.0, 0.0, 0.0, 0.0, 0j, 0j, 0j, 0j, 0j, 0j)
        d = bloch_rhs(state, FieldSample(), reference_system())
        assert d.pop_a == pytest.approx(-3.0)
        assert d.pop_b == pytest.approx(1.0)
        assert d.pop_c == pytest.approx(1.0)
        assert d.pop_d == pytest.approx(1.0)

    def test_real_signal_drives_optical_coherence(self):
        d = bloch_rhs(SigmaState.ground(), FieldSample(omega1=0.3), lossless_system())
        assert d.coh_ab == pytest.approx(0.3j, rel=1e-14)

    def test_population_derivatives_are_real(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            arr = rng.normal(size=10) + 1j * rng.normal(size=10)
            arr[:4] = np.abs(arr[:4].real)
            state = SigmaState.from_array(arr)
            fields = FieldSample(
                omega1=complex(rng.normal(), rng.normal()),
                omega2=complex(rng.normal(), rng.normal()),
                omega3=complex(rng.normal(), rng.normal()),
            )
            d = bloch_rhs(state, fields, reference_system()).to_array()
            assert np.max(np.abs(d[:4].imag)) <= 1e-14

    def test_trace_derivative_vanishes(self):
        rng = np.random.default_rng(11)
        arr = rng.normal(size=10) + 1j * rng.normal(size=10)
        arr[:4] = np.abs(arr[:4].real)
        d = bloch_rhs(
            SigmaState.from_array(arr),
            FieldSample(omega1=0.1 + 0.2j, omega2=2.0, omega3=1.0 - 0.5j),
            reference_system(),
        )
        assert d.pop_a + d.pop_b + d.pop_c + d.pop_d == pytest.approx(0.0, abs=1e-14)


class TestRk4Step:
    def test_zero_rhs_returns_input_exactly(self):
        state = SigmaState(0.1, 0.4, 0.3, 0.2, 0.05j, 0.01, 0j, 0.02, 0.01j, 0j)
        out = rk4_step(state, FieldSample(), FieldSample(), FieldSample(),
                       lossless_system(), dt=0.1)
        assert out == state

    def test_exponential_decay_oracle(self):
        system = reference_system()  # gamma = 3
        dt = 0.01 / 3.0  # gamma * dt = 0.01
        state = SigmaState(1.0, 0.0, 0.0, 0.0, 0j, 0j, 0j, 0j, 0j, 0j)
        f = FieldSample()
        n = 500
        for _ in range(n):
            state = rk4_step(state, f, f, f, system, dt)
        exact = math.exp(-3.0 * n * dt)
        assert abs(state.pop_a - exact) / exact <= 1e-6

    def test_rabi_flopping_oracle(self):
        """Two-level flopping: pop_b = cos^2(omega1 t), revival at t = pi/omega1."""
        system = lossless_system()
        w = 1.0
        f = FieldSample(omega1=w)
        dt = 0.005
        state = SigmaState.ground()
        worst = 0.0
        for k in range(1, round(2 * math.pi / w / dt) + 1):
            state = rk4_step(state, f, f, f, system, dt)
            worst = max(worst, abs(state.pop_b - math.cos(w * k * dt) ** 2))
        assert worst <= 1e-5

    def test_rk4_order(self):
        """Halving dt shrinks the flopping error by roughly 2^4."""
        system = lossless_system()
        w = 1.0
        t_end = 2.0

        def max_error(dt: float) -> float:
            state = SigmaState.ground()
            f = FieldSample(omega1=w)
            worst = 0.0
            for k in range(1, round(t_end / dt) + 1):
                state = rk4_step(state, f, f, f, system, dt)
                worst = max(worst, abs(state.pop_b - math.cos(w * k * dt) ** 2))
            return worst

        ratio = max_error(0.04) / max_error(0.02)
        assert 10.0 < ratio < 24.0

    def test_divergence_error_names_time_and_step(self):
        state = SigmaState.from_array(np.full(10, np.inf, dtype=np.complex128))
        with pytest.raises(DivergenceError, match="t = 3.0.*dt = 0.5"):
            rk4_step(state, FieldSample(), FieldSample(), FieldSample(),
                     reference_system(), dt=0.5, t=3.0)

    def test_purity_bounded_for_physical_states(self):
        system = reference_system()
        f = FieldSample(omega1=0.02, omega2=2.5, omega3=2.5)
        state = SigmaState.ground()
        for _ in range(400):
            state = rk4_step(state, f, f, f, system, dt=0.01)
            assert state.purity <= 1.0 + 1e-6
            assert state.trace == pytest.approx(1.0, abs=1e-9)


class TestMagneticStage:
    def _dark_state(self, n: int = 24) -> np.ndarray:
        xi = np.linspace(0.0, 1.0, n)
        profile = 0.003 * np.exp(-(((xi - 0.45) / 0.2) ** 2)) * np.exp(0.7j)
        sigma = np.zeros((n, 10), dtype=np.complex128)
        sigma[:, BC] = profile * math.cos(math.pi / 4)
        sigma[:, BD] = profile * math.sin(math.pi / 4)
        pops = np.abs(sigma[:, BC]) ** 2 + np.abs(sigma[:, BD]) ** 2
        sigma[:, 1] = 1.0 - 2.0 * pops
        sigma[:, 2] = pops
        sigma[:, 3] = pops
        return sigma

    def test_dual_routes_agree(self):
        scenario = ts.storage_scenario(magnetic_area=2 * math.pi)
        diff = ts.magnetic_route_difference(self._dark_state(), scenario)
        assert diff <= 1e-6

    @pytest.mark.parametrize("area", [0.5, math.pi, 5.0])
    def test_kick_rotates_bc_by_area(self, area):
        scenario = ts.storage_scenario(magnetic_area=area)
        sigma = self._dark_state()
        out = ts.apply_phase_kick(sigma, ts.magnetic_phase_area(scenario))
        got = np.angle(out[:, BC] / sigma[:, BC])
        expected = math.remainder(area, 2 * math.pi)
        assert got == pytest.approx(np.full_like(got, expected), abs=1e-12)
        assert np.abs(out[:, BD] - sigma[:, BD]).max() == 0.0

    def test_phase_advances_linearly_during_stage(self):
        """With fields off, |coh_bc| is constant and its phase advances at
        -(E_c - E_b); coh_bd advances at -(E_d - E_b)."""
        scenario = ts.storage_scenario(magnetic_area=math.pi)
        sb, sc, sd = zeeman_detuning_shifts(
            scenario.system.zeeman, scenario.magnetic.b_field_tesla, scenario.units
        )
        system = scenario.system
        state = SigmaState(0.0, 0.9, 0.05, 0.05, 0j, 0j, 0j, 0.01 + 0.02j, 0.015, 0j)
        fields = FieldSample(detuning_shift_b=sb, detuning_shift_c=sc, detuning_shift_d=sd)
        dt = 0.01
        n = 400
        s = state
        for _ in range(n):
            s = rk4_step(s, fields, fields, fields, system, dt)
        t = n * dt
        assert abs(s.coh_bc) == pytest.approx(abs(state.coh_bc), rel=1e-8)
        got_rate_bc = np.angle(s.coh_bc / state.coh_bc) / t
        assert got_rate_bc == pytest.approx(-(sc - sb), rel=1e-8)
        got_rate_bd = np.angle(s.coh_bd / state.coh_bd) / t if abs(s.coh_bd) else 0.0
        assert got_rate_bd == pytest.approx(-(sd - sb), rel=1e-6, abs=1e-12)


class TestSigmaState:
    def test_array_round_trip(self):
        state = SigmaState(0.1, 0.2, 0.3, 0.4, 1j, 2.0, 3j, 4.0, 5j, 6.0)
        assert SigmaState.from_array(state.to_array()) == state

    def test_trace(self):
        assert SigmaState.ground().trace == 1.0
