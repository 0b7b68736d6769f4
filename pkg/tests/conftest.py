"""Shared fixtures: scaled-down scenarios that keep the unit tests fast.

The mini regimes preserve the physics (slow light, storage, release) at a
few hundred cells and 10-20k steps; the acceptance suite runs the full
reference parameter set.
"""

import math

import pytest

import tripodsim as ts

MINI = dict(
    alpha=800.0,
    control_amplitude=2.5,
    signal_amplitude=0.02,
    signal_width_us=1.2,
    magnetic_duration_us=1.2,
    magnetic_t_start=55.0,
    release_time=120.0,
    t_final=210.0,
    n_xi=200,
    d_tau=0.01,
)


def mini_storage(**overrides) -> ts.Scenario:
    params = {**MINI, **overrides}
    return ts.storage_scenario(**params)


def mini_transparency(**overrides) -> ts.Scenario:
    params = dict(
        alpha=400.0, control_amplitude=2.5, signal_amplitude=0.02,
        signal_width_us=1.2, n_xi=200, d_tau=0.01, t_final=90.0,
    )
    params.update(overrides)
    return ts.transparency_scenario(**params)


@pytest.fixture(scope="session")
def storage_record() -> ts.SimulationRecord:
    """Mini storage run without magnetic manipulation."""
    return ts.run_simulation(mini_storage(b_field_tesla=0.0))


@pytest.fixture(scope="session")
def kicked_record() -> ts.SimulationRecord:
    """Mini storage run with a pi/2 phase kick; one pre-kick dark snapshot."""
    return ts.run_simulation(mini_storage(magnetic_area=math.pi / 2, snapshot_times=(54.0,)))


@pytest.fixture(scope="session")
def transparency_record() -> ts.SimulationRecord:
    return ts.run_simulation(mini_transparency())
