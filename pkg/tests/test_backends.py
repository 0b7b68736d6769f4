"""Equivalence of the compiled kernels and the pure-NumPy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

import tripodsim as ts
from tripodsim import backend
from tests.conftest import mini_storage

numba_backend = pytest.importorskip("numba", reason="numba backend not installed")


@pytest.fixture(scope="module")
def short_scenario():
    return mini_storage(magnetic_area=1.0, t_final=140.0, snapshot_times=(100.0,))


def test_march_outputs_agree(short_scenario):
    rec_nb = ts.run_simulation(short_scenario, backend="numba")
    rec_np = ts.run_simulation(short_scenario, backend="numpy")
    scale = np.abs(rec_np.boundary_series).max()
    assert np.abs(rec_nb.boundary_series - rec_np.boundary_series).max() <= 1e-12 * scale
    assert np.abs(rec_nb.excitation_series - rec_np.excitation_series).max() <= 1e-12
    for f_nb, f_np in zip(rec_nb.snapshots, rec_np.snapshots):
        assert f_nb.tau == f_np.tau
        assert np.abs(f_nb.sigma - f_np.sigma).max() <= 1e-12


def test_rhs_kernels_bitwise_close():
    rng = np.random.default_rng(5)
    sigma = rng.normal(size=(40, 10)) + 1j * rng.normal(size=(40, 10))
    omega1 = rng.normal(size=40) + 1j * rng.normal(size=40)
    args = (0.4 + 0.1j, 1.2 - 0.3j, 0.05, -0.02, 0.01, 1.0, 0.8, 1.2, 0.1, -0.2, 0.3)
    out_np = backend.get_backend("numpy").bloch_rhs(sigma, omega1, *args)
    out_nb = backend.get_backend("numba").bloch_rhs(sigma, omega1, *args)
    assert np.abs(out_np - out_nb).max() <= 1e-14 * max(1.0, np.abs(out_np).max())


def test_field_slice_kernels_agree():
    rng = np.random.default_rng(9)
    sba = rng.normal(size=128) + 1j * rng.normal(size=128)
    a = backend.get_backend("numpy").field_slice(sba, 0.3 + 0.1j, 50.0, 1.0 / 127)
    b = backend.get_backend("numba").field_slice(sba, 0.3 + 0.1j, 50.0, 1.0 / 127)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()


def test_env_flag_selects_fallback():
    code = (
        "import tripodsim.backend as b; print(b.active_backend_name())"
    )
    env = dict(os.environ, TRIPODSIM_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_explicit_selection():
    assert backend.get_backend("numpy").NAME == "numpy"
    assert backend.get_backend("numba").NAME == "numba"


def test_invalid_env_value_rejected(monkeypatch):
    monkeypatch.setenv(backend.BACKEND_ENV, "cuda")
    with pytest.raises(ValueError):
        backend.default_backend_name()
