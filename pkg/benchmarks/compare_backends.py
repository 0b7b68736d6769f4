#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs the same scaled-down storage scenario on both backends, reports wall
times and the largest deviation between the two exit series.  The numba
timing excludes JIT compilation (one warm-up run).

Usage: python benchmarks/compare_backends.py [--repeat N] [--full]
"""

import argparse
import time

import numpy as np

import tripodsim as ts


def build_scenario(full: bool) -> ts.Scenario:
    if full:
        return ts.storage_scenario(b_field_tesla=0.0)
    return ts.storage_scenario(
        b_field_tesla=0.0, alpha=1000.0, n_xi=150, d_tau=0.005, t_final=300.0
    )


def time_backend(scenario: ts.Scenario, backend: str, repeat: int):
    runs = []
    record = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        record = ts.run_simulation(scenario, backend=backend)
        runs.append(time.perf_counter() - t0)
    return min(runs), record


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="timed repetitions per backend")
    parser.add_argument("--full", action="store_true",
                        help="use the full-scale reference scenario (slower)")
    args = parser.parse_args()

    scenario = build_scenario(args.full)
    steps = scenario.grid.n_tau
    cells = scenario.grid.n_xi
    print(f"scenario: {cells} cells x {steps} steps (alpha={scenario.coupling_alpha:g})")

    ts.run_simulation(scenario, backend="numba")  # JIT warm-up, not timed

    t_numba, rec_numba = time_backend(scenario, "numba", args.repeat)
    t_numpy, rec_numpy = time_backend(scenario, "numpy", args.repeat)

    dev = float(np.abs(rec_numba.boundary_series - rec_numpy.boundary_series).max())
    scale = max(float(np.abs(rec_numpy.boundary_series).max()), 1e-300)

    print(f"numba : {t_numba:8.3f} s   ({steps * cells / t_numba / 1e6:7.2f} Mcell-steps/s)")
    print(f"numpy : {t_numpy:8.3f} s   ({steps * cells / t_numpy / 1e6:7.2f} Mcell-steps/s)")
    print(f"speedup: {t_numpy / t_numba:5.1f}x")
    print(f"max exit-series deviation: {dev:.3e} ({dev / scale:.3e} of peak)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
