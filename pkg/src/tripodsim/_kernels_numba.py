"""JIT-compiled twin of the NumPy kernels (same math, explicit cell loops).

Public entry points mirror :mod:`tripodsim._kernels_numpy` exactly; the march
keeps the whole time loop inside one nopython region and releases the GIL so
sweeps can run runs in parallel threads.
"""

import numpy as np
from numba import njit

NAME = "numba"

N_COMPONENTS = 10
AA, BB, CC, DD, AB, AC, AD, BC, BD, CD = range(N_COMPONENTS)

_DIVERGENCE_CHECK_STRIDE = 128

_JIT_OPTS = dict(cache=True, nogil=True)


@njit(**_JIT_OPTS)
def _rhs_fill(
    sigma, omega1, omega2, omega3, shift_b, shift_c, shift_d,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, out,
):
    # Effective detunings: each coherence rotates at bare detuning plus the
    # Zeeman shift of its lower level relative to level a (ab: +shift_b,
    # ac: +shift_c, ad: +shift_d; bc/bd/cd at the pairwise differences).
    gamma = gamma_ab + gamma_ac + gamma_ad
    half_gamma = 0.5 * gamma
    d1 = delta1 + shift_b
    d2 = delta2 + shift_c
    d3 = delta3 + shift_d
    w2c = np.conj(omega2)
    w3c = np.conj(omega3)
    for i in range(sigma.shape[0]):
        aa = sigma[i, AA]
        bb = sigma[i, BB]
        cc = sigma[i, CC]
        dd = sigma[i, DD]
        ab = sigma[i, AB]
        ac = sigma[i, AC]
        ad = sigma[i, AD]
        bc = sigma[i, BC]
        bd = sigma[i, BD]
        cd = sigma[i, CD]
        aa_r = aa.real
        w1 = omega1[i]
        w1c = np.conj(w1)

        p1 = w1 * ab
        p2 = omega2 * ac
        p3 = omega3 * ad

        out[i, AA] = 2.0 * (p1.imag + p2.imag + p3.imag) - gamma * aa_r
        out[i, BB] = gamma_ab * aa_r - 2.0 * p1.imag
        out[i, CC] = gamma_ac * aa_r - 2.0 * p2.imag
        out[i, DD] = gamma_ad * aa_r - 2.0 * p3.imag

        out[i, AB] = -1j * (
            (d1 - 1j * half_gamma) * ab - w1c * (bb - aa) - w2c * np.conj(bc) - w3c * np.conj(bd)
        )
        out[i, AC] = -1j * (
            (d2 - 1j * half_gamma) * ac - w2c * (cc - aa) - w1c * bc - w3c * np.conj(cd)
        )
        out[i, AD] = -1j * (
            (d3 - 1j * half_gamma) * ad - w3c * (dd - aa) - w1c * bd - w2c * cd
        )
        out[i, BC] = -1j * ((d2 - d1) * bc - w1 * ac + w2c * np.conj(ab))
        out[i, BD] = -1j * ((d3 - d1) * bd - w1 * ad + w3c * np.conj(ab))
        out[i, CD] = -1j * ((d3 - d2) * cd - omega2 * ad + w3c * np.conj(ac))


def bloch_rhs(
    sigma, omega1, omega2, omega3, shift_b, shift_c, shift_d,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3,
):
    out = np.empty_like(sigma)
    _rhs_fill(
        sigma, omega1, complex(omega2), complex(omega3),
        float(shift_b), float(shift_c), float(shift_d),
        float(gamma_ab), float(gamma_ac), float(gamma_ad),
        float(delta1), float(delta2), float(delta3), out,
    )
    return out


@njit(**_JIT_OPTS)
def _rk4_inplace(
    sigma, omega1, w2a, w2b, w2c, w3a, w3b, w3c,
    sba, sbb, sbc, sca, scb, scc, sda, sdb, sdc,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, dt,
    k1, k2, k3, k4, stage,
):
    n = sigma.shape[0]
    half_dt = 0.5 * dt
    sixth = dt / 6.0
    _rhs_fill(sigma, omega1, w2a, w3a, sba, sca, sda,
              gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, k1)
    for i in range(n):
        for c in range(N_COMPONENTS):
            stage[i, c] = sigma[i, c] + half_dt * k1[i, c]
    _rhs_fill(stage, omega1, w2b, w3b, sbb, scb, sdb,
              gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, k2)
    for i in range(n):
        for c in range(N_COMPONENTS):
            stage[i, c] = sigma[i, c] + half_dt * k2[i, c]
    _rhs_fill(stage, omega1, w2b, w3b, sbb, scb, sdb,
              gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, k3)
    for i in range(n):
        for c in range(N_COMPONENTS):
            stage[i, c] = sigma[i, c] + dt * k3[i, c]
    _rhs_fill(stage, omega1, w2c, w3c, sbc, scc, sdc,
              gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, k4)
    for i in range(n):
        for c in range(N_COMPONENTS):
            sigma[i, c] = sigma[i, c] + sixth * (
                k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c]
            )


def rk4_step_cells(
    sigma, omega1, w2_stages, w3_stages, sb_stages, sc_stages, sd_stages,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, dt,
):
    out = sigma.copy()
    k1 = np.empty_like(sigma)
    k2 = np.empty_like(sigma)
    k3 = np.empty_like(sigma)
    k4 = np.empty_like(sigma)
    stage = np.empty_like(sigma)
    _rk4_inplace(
        out, omega1,
        complex(w2_stages[0]), complex(w2_stages[1]), complex(w2_stages[2]),
        complex(w3_stages[0]), complex(w3_stages[1]), complex(w3_stages[2]),
        float(sb_stages[0]), float(sb_stages[1]), float(sb_stages[2]),
        float(sc_stages[0]), float(sc_stages[1]), float(sc_stages[2]),
        float(sd_stages[0]), float(sd_stages[1]), float(sd_stages[2]),
        float(gamma_ab), float(gamma_ac), float(gamma_ad),
        float(delta1), float(delta2), float(delta3), float(dt),
        k1, k2, k3, k4, stage,
    )
    return out


@njit(**_JIT_OPTS)
def _field_slice_inplace(sigma, boundary_value, alpha, d_xi, out):
    coeff = -1j * alpha * (0.5 * d_xi)
    out[0] = boundary_value
    acc = boundary_value
    for k in range(1, sigma.shape[0]):
        acc = acc + coeff * (np.conj(sigma[k - 1, AB]) + np.conj(sigma[k, AB]))
        out[k] = acc


def field_slice(sigma_ba, boundary_value, alpha, d_xi):
    out = np.empty(sigma_ba.shape[0], dtype=np.complex128)
    _field_slice_kernel(
        np.ascontiguousarray(sigma_ba), complex(boundary_value), float(alpha), float(d_xi), out
    )
    return out


@njit(**_JIT_OPTS)
def _field_slice_kernel(sigma_ba, boundary_value, alpha, d_xi, out):
    coeff = -1j * alpha * (0.5 * d_xi)
    out[0] = boundary_value
    acc = boundary_value
    for k in range(1, sigma_ba.shape[0]):
        acc = acc + coeff * (sigma_ba[k - 1] + sigma_ba[k])
        out[k] = acc


@njit(**_JIT_OPTS)
def _march(
    sigma, boundary, w2_half, w3_half, sb_half, sc_half, sd_half,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3,
    alpha, d_tau, d_xi, snap_steps,
    exit_series, excitation, snaps_sigma, snaps_omega1,
):
    n_cells = sigma.shape[0]
    n_tau = boundary.shape[0] - 1
    n_snap = snap_steps.shape[0]

    k1 = np.empty_like(sigma)
    k2 = np.empty_like(sigma)
    k3 = np.empty_like(sigma)
    k4 = np.empty_like(sigma)
    stage = np.empty_like(sigma)
    omega1 = np.empty(n_cells, dtype=np.complex128)

    trace0 = np.empty(n_cells, dtype=np.float64)
    min_population = np.inf
    trace_error_max = 0.0
    for i in range(n_cells):
        tr = sigma[i, AA].real + sigma[i, BB].real + sigma[i, CC].real + sigma[i, DD].real
        trace0[i] = tr
        for c in range(4):
            p = sigma[i, c].real
            if p < min_population:
                min_population = p

    _field_slice_inplace(sigma, boundary[0], alpha, d_xi, omega1)
    exit_series[0] = omega1[n_cells - 1]
    exc = 0.0
    for i in range(n_cells):
        exc += 1.0 - sigma[i, BB].real
    excitation[0] = exc * d_xi

    snap_ptr = 0
    if snap_ptr < n_snap and snap_steps[snap_ptr] == 0:
        snaps_sigma[snap_ptr] = sigma
        snaps_omega1[snap_ptr] = omega1
        snap_ptr += 1

    for n in range(n_tau):
        j = 2 * n
        _rk4_inplace(
            sigma, omega1,
            w2_half[j], w2_half[j + 1], w2_half[j + 2],
            w3_half[j], w3_half[j + 1], w3_half[j + 2],
            sb_half[j], sb_half[j + 1], sb_half[j + 2],
            sc_half[j], sc_half[j + 1], sc_half[j + 2],
            sd_half[j], sd_half[j + 1], sd_half[j + 2],
            gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3, d_tau,
            k1, k2, k3, k4, stage,
        )
        _field_slice_inplace(sigma, boundary[n + 1], alpha, d_xi, omega1)

        exc = 0.0
        for i in range(n_cells):
            tr = sigma[i, AA].real + sigma[i, BB].real + sigma[i, CC].real + sigma[i, DD].real
            err = abs(tr - trace0[i])
            if err > trace_error_max:
                trace_error_max = err
            for c in range(4):
                p = sigma[i, c].real
                if p < min_population:
                    min_population = p
            exc += 1.0 - sigma[i, BB].real
        excitation[n + 1] = exc * d_xi
        exit_series[n + 1] = omega1[n_cells - 1]

        if snap_ptr < n_snap and snap_steps[snap_ptr] == n + 1:
            snaps_sigma[snap_ptr] = sigma
            snaps_omega1[snap_ptr] = omega1
            snap_ptr += 1

        if (n + 1) % _DIVERGENCE_CHECK_STRIDE == 0 or n + 1 == n_tau:
            last = omega1[n_cells - 1]
            if not (
                np.isfinite(trace_error_max)
                and np.isfinite(last.real)
                and np.isfinite(last.imag)
            ):
                return min_population, trace_error_max, n + 1

    return min_population, trace_error_max, -1


def march(
    sigma, boundary, w2_half, w3_half, sb_half, sc_half, sd_half,
    gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3,
    alpha, d_tau, d_xi, snap_steps,
):
    """Full time march; same contract as the NumPy twin."""
    sigma = sigma.copy()
    n_cells = sigma.shape[0]
    n_tau = boundary.shape[0] - 1
    n_snap = snap_steps.shape[0]
    exit_series = np.empty(n_tau + 1, dtype=np.complex128)
    excitation = np.empty(n_tau + 1, dtype=np.float64)
    snaps_sigma = np.empty((n_snap, n_cells, N_COMPONENTS), dtype=np.complex128)
    snaps_omega1 = np.empty((n_snap, n_cells), dtype=np.complex128)
    min_population, trace_error_max, diverged = _march(
        sigma,
        np.ascontiguousarray(boundary),
        np.ascontiguousarray(w2_half),
        np.ascontiguousarray(w3_half),
        np.ascontiguousarray(sb_half),
        np.ascontiguousarray(sc_half),
        np.ascontiguousarray(sd_half),
        float(gamma_ab), float(gamma_ac), float(gamma_ad),
        float(delta1), float(delta2), float(delta3),
        float(alpha), float(d_tau), float(d_xi),
        np.ascontiguousarray(snap_steps, dtype=np.int64),
        exit_series, excitation, snaps_sigma, snaps_omega1,
    )
    return (exit_series, excitation, snaps_sigma, snaps_omega1,
            float(min_population), float(trace_error_max), int(diverged))
