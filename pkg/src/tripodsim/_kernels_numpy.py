"""Reference NumPy implementation of the hot numerical kernels.

State layout: ``sigma`` is an (n_cells, 10) complex128 array with component
order [aa, bb, cc, dd, ab, ac, ad, bc, bd, cd].  Populations occupy the real
part of the first four slots (their imaginary parts stay identically zero).
Only the upper triangle of the density matrix is stored; the lower triangle
follows from Hermiticity.
"""

import numpy as np

NAME = "numpy"

N_COMPONENTS = 10
AA, BB, CC, DD, AB, AC, AD, BC, BD, CD = range(N_COMPONENTS)

_DIVERGENCE_CHECK_STRIDE = 128


def bloch_rhs(
    sigma,
    omega1,
    omega2,
    omega3,
    shift_b,
    shift_c,
    shift_d,
    gamma_ab,
    gamma_ac,
    gamma_ad,
    delta1,
    delta2,
    delta3,
):
    """Time derivative of every cell's density-matrix components.

    ``omega1`` is per-cell (n_cells,) complex; the control Rabi frequencies
    ``omega2``/``omega3`` are space-independent complex scalars.  The Zeeman
    shifts (E_level - E_a, in Gamma units) modify the rotation frequency of
    each coherence:

        ab rotates at delta1 + shift_b          bc at (delta2+shift_c) - (delta1+shift_b)
        ac rotates at delta2 + shift_c          bd at (delta3+shift_d) - (delta1+shift_b)
        ad rotates at delta3 + shift_d          cd at (delta3+shift_d) - (delta2+shift_c)
    """
    gamma = gamma_ab + gamma_ac + gamma_ad
    d1 = delta1 + shift_b
    d2 = delta2 + shift_c
    d3 = delta3 + shift_d

    aa = sigma[:, AA]
    bb = sigma[:, BB]
    cc = sigma[:, CC]
    dd = sigma[:, DD]
    ab = sigma[:, AB]
    ac = sigma[:, AC]
    ad = sigma[:, AD]
    bc = sigma[:, BC]
    bd = sigma[:, BD]
    cd = sigma[:, CD]
    aa_r = aa.real

    p1 = omega1 * ab
    p2 = omega2 * ac
    p3 = omega3 * ad

    out = np.empty_like(sigma)
    out[:, AA] = 2.0 * (p1.imag + p2.imag + p3.imag) - gamma * aa_r
    out[:, BB] = gamma_ab * aa_r - 2.0 * p1.imag
    out[:, CC] = gamma_ac * aa_r - 2.0 * p2.imag
    out[:, DD] = gamma_ad * aa_r - 2.0 * p3.imag

    w1c = np.conj(omega1)
    w2c = np.conj(omega2)
    w3c = np.conj(omega3)
    half_gamma = 0.5 * gamma

    out[:, AB] = -1j * (
        (d1 - 1j * half_gamma) * ab - w1c * (bb - aa) - w2c * np.conj(bc) - w3c * np.conj(bd)
    )
    out[:, AC] = -1j * (
        (d2 - 1j * half_gamma) * ac - w2c * (cc - aa) - w1c * bc - w3c * np.conj(cd)
    )
    out[:, AD] = -1j * (
        (d3 - 1j * half_gamma) * ad - w3c * (dd - aa) - w1c * bd - w2c * cd
    )
    out[:, BC] = -1j * ((d2 - d1) * bc - omega1 * ac + w2c * np.conj(ab))
    out[:, BD] = -1j * ((d3 - d1) * bd - omega1 * ad + w3c * np.conj(ab))
    out[:, CD] = -1j * ((d3 - d2) * cd - omega2 * ad + w3c * np.conj(ac))
    return out


def rk4_step_cells(
    sigma,
    omega1,
    w2_stages,
    w3_stages,
    sb_stages,
    sc_stages,
    sd_stages,
    gamma_ab,
    gamma_ac,
    gamma_ad,
    delta1,
    delta2,
    delta3,
    dt,
):
    """Classical RK4 update of all cells over one time step.

    Control values and Zeeman shifts are sampled at the three stage times
    (t, t + dt/2, t + dt); omega1 is held frozen across the stages.
    """
    args = (gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3)
    k1 = bloch_rhs(sigma, omega1, w2_stages[0], w3_stages[0],
                   sb_stages[0], sc_stages[0], sd_stages[0], *args)
    k2 = bloch_rhs(sigma + (0.5 * dt) * k1, omega1, w2_stages[1], w3_stages[1],
                   sb_stages[1], sc_stages[1], sd_stages[1], *args)
    k3 = bloch_rhs(sigma + (0.5 * dt) * k2, omega1, w2_stages[1], w3_stages[1],
                   sb_stages[1], sc_stages[1], sd_stages[1], *args)
    k4 = bloch_rhs(sigma + dt * k3, omega1, w2_stages[2], w3_stages[2],
                   sb_stages[2], sc_stages[2], sd_stages[2], *args)
    return sigma + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def field_slice(sigma_ba, boundary_value, alpha, d_xi):
    """Trapezoidal integration of d omega1 / d xi = -i alpha sigma_ba from xi = 0."""
    n = sigma_ba.shape[0]
    out = np.empty(n, dtype=np.complex128)
    out[0] = boundary_value
    coeff = -1j * alpha * (0.5 * d_xi)
    increments = coeff * (sigma_ba[:-1] + sigma_ba[1:])
    out[1:] = boundary_value + np.cumsum(increments)
    return out


def march(
    sigma,
    boundary,
    w2_half,
    w3_half,
    sb_half,
    sc_half,
    sd_half,
    gamma_ab,
    gamma_ac,
    gamma_ad,
    delta1,
    delta2,
    delta3,
    alpha,
    d_tau,
    d_xi,
    snap_steps,
):
    """Full time march; see the numba twin for the contract.

    Returns (exit_series, excitation_series, snaps_sigma, snaps_omega1,
    min_population, trace_error_max, diverged_step); ``diverged_step`` is -1
    on success, else the first step index at which non-finite values appeared.
    """
    sigma = sigma.copy()
    n_cells = sigma.shape[0]
    n_tau = boundary.shape[0] - 1
    n_snap = snap_steps.shape[0]

    exit_series = np.empty(n_tau + 1, dtype=np.complex128)
    excitation = np.empty(n_tau + 1, dtype=np.float64)
    snaps_sigma = np.empty((n_snap, n_cells, N_COMPONENTS), dtype=np.complex128)
    snaps_omega1 = np.empty((n_snap, n_cells), dtype=np.complex128)

    trace0 = sigma[:, AA:DD + 1].real.sum(axis=1)
    min_population = float(sigma[:, AA:DD + 1].real.min())
    trace_error_max = 0.0

    omega1 = field_slice(np.conj(sigma[:, AB]), boundary[0], alpha, d_xi)
    exit_series[0] = omega1[n_cells - 1]
    excitation[0] = float((1.0 - sigma[:, BB].real).sum()) * d_xi

    snap_ptr = 0
    if snap_ptr < n_snap and snap_steps[snap_ptr] == 0:
        snaps_sigma[snap_ptr] = sigma
        snaps_omega1[snap_ptr] = omega1
        snap_ptr += 1

    args = (gamma_ab, gamma_ac, gamma_ad, delta1, delta2, delta3)
    for n in range(n_tau):
        j = 2 * n
        sigma = rk4_step_cells(
            sigma,
            omega1,
            w2_half[j:j + 3],
            w3_half[j:j + 3],
            sb_half[j:j + 3],
            sc_half[j:j + 3],
            sd_half[j:j + 3],
            *args,
            d_tau,
        )
        omega1 = field_slice(np.conj(sigma[:, AB]), boundary[n + 1], alpha, d_xi)

        pops = sigma[:, AA:DD + 1].real
        min_population = min(min_population, float(pops.min()))
        trace_err = float(np.abs(pops.sum(axis=1) - trace0).max())
        trace_error_max = max(trace_error_max, trace_err)
        exit_series[n + 1] = omega1[n_cells - 1]
        excitation[n + 1] = float((1.0 - sigma[:, BB].real).sum()) * d_xi

        if snap_ptr < n_snap and snap_steps[snap_ptr] == n + 1:
            snaps_sigma[snap_ptr] = sigma
            snaps_omega1[snap_ptr] = omega1
            snap_ptr += 1

        if (n + 1) % _DIVERGENCE_CHECK_STRIDE == 0 or n + 1 == n_tau:
            if not (np.isfinite(trace_error_max) and np.all(np.isfinite(omega1))):
                return (exit_series, excitation, snaps_sigma, snaps_omega1,
                        min_population, trace_error_max, n + 1)

    return (exit_series, excitation, snaps_sigma, snaps_omega1,
            min_population, trace_error_max, -1)
