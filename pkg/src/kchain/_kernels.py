"""Numba hot loops: classical RK4 integration and propagator evolution.

The classical kernels advance phase (or amplitude+phase) states with a fixed
RK4 step; coupling sums are evaluated through one complex matvec per stage
using C = K * exp(i*B), since sum_j K_ij sin(th_j - th_i + B_ij) is the
imaginary part of conj(z_i) * (C z)_i with z = exp(i*theta).

The propagator kernels advance dO/dt = M(t) O (real antisymmetric M) or
dU/dt = -i h(t) U (real symmetric h) with RK4, sampling the drive phases by
cubic Hermite interpolation on the stored classical grid.  Stage times are
tracked as exact integer half-steps, so grid-aligned samples are bitwise
exact and never drift.  After every step the pre-projection defect
max|O^T O - I| (or max|U^+ U - I|) is measured; the step is rejected above
`abort_defect`, otherwise the matrix is re-projected onto the orthogonal /
unitary manifold by Newton-Schulz polar iteration.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _kuramoto_rhs_c(theta, cmat, omega, out):
    n = theta.shape[0]
    z = np.empty(n, dtype=np.complex128)
    for i in range(n):
        z[i] = complex(np.cos(theta[i]), np.sin(theta[i]))
    w = np.dot(cmat, z)
    for i in range(n):
        out[i] = omega[i] + (z[i].real * w[i].imag - z[i].imag * w[i].real)


@njit(cache=True)
def integrate_kuramoto(theta0, cmat, omega, dt, steps, out):
    """RK4 on the phase ODE; rows of `out` are the states at every step.

    Returns the 1-based step index at which the state became non-finite,
    or 0 on success.
    """
    n = theta0.shape[0]
    th = theta0.copy()
    out[0] = th
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for s in range(steps):
        _kuramoto_rhs_c(th, cmat, omega, k1)
        for i in range(n):
            tmp[i] = th[i] + 0.5 * dt * k1[i]
        _kuramoto_rhs_c(tmp, cmat, omega, k2)
        for i in range(n):
            tmp[i] = th[i] + 0.5 * dt * k2[i]
        _kuramoto_rhs_c(tmp, cmat, omega, k3)
        for i in range(n):
            tmp[i] = th[i] + dt * k3[i]
        _kuramoto_rhs_c(tmp, cmat, omega, k4)
        ok = True
        for i in range(n):
            th[i] = th[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not np.isfinite(th[i]):
                ok = False
        out[s + 1] = th
        if not ok:
            return s + 1
    return 0


@njit(cache=True)
def _sl_rhs_c(r, theta, cmat, omega, kappa1, kappa2, out_r, out_th):
    n = theta.shape[0]
    z = np.empty(n, dtype=np.complex128)
    for i in range(n):
        z[i] = complex(np.cos(theta[i]), np.sin(theta[i]))
    w = np.dot(cmat, z)
    for i in range(n):
        # conj(z_i) * w_i = sum_j K_ij exp(i (th_j - th_i + B_ij))
        re = z[i].real * w[i].real + z[i].imag * w[i].imag
        im = z[i].real * w[i].imag - z[i].imag * w[i].real
        out_r[i] = r[i] * (kappa1 - 2.0 * kappa2 * r[i] * r[i]) - r[i] * im
        out_th[i] = -omega[i] - re


@njit(cache=True)
def integrate_stuart_landau(r0, theta0, cmat, omega, kappa1, kappa2, dt, steps,
                            out_r, out_th):
    n = theta0.shape[0]
    r = r0.copy()
    th = theta0.copy()
    out_r[0] = r
    out_th[0] = th
    kr1 = np.empty(n); kt1 = np.empty(n)
    kr2 = np.empty(n); kt2 = np.empty(n)
    kr3 = np.empty(n); kt3 = np.empty(n)
    kr4 = np.empty(n); kt4 = np.empty(n)
    tr = np.empty(n); tt = np.empty(n)
    for s in range(steps):
        _sl_rhs_c(r, th, cmat, omega, kappa1, kappa2, kr1, kt1)
        for i in range(n):
            tr[i] = r[i] + 0.5 * dt * kr1[i]
            tt[i] = th[i] + 0.5 * dt * kt1[i]
        _sl_rhs_c(tr, tt, cmat, omega, kappa1, kappa2, kr2, kt2)
        for i in range(n):
            tr[i] = r[i] + 0.5 * dt * kr2[i]
            tt[i] = th[i] + 0.5 * dt * kt2[i]
        _sl_rhs_c(tr, tt, cmat, omega, kappa1, kappa2, kr3, kt3)
        for i in range(n):
            tr[i] = r[i] + dt * kr3[i]
            tt[i] = th[i] + dt * kt3[i]
        _sl_rhs_c(tr, tt, cmat, omega, kappa1, kappa2, kr4, kt4)
        ok = True
        for i in range(n):
            r[i] = r[i] + (dt / 6.0) * (kr1[i] + 2.0 * kr2[i] + 2.0 * kr3[i] + kr4[i])
            th[i] = th[i] + (dt / 6.0) * (kt1[i] + 2.0 * kt2[i] + 2.0 * kt3[i] + kt4[i])
            if not (np.isfinite(r[i]) and np.isfinite(th[i])):
                ok = False
        out_r[s + 1] = r
        out_th[s + 1] = th
        if not ok:
            return s + 1
    return 0


@njit(cache=True, inline="always")
def _hermite_theta(phases, k, u, out):
    """Cubic Hermite sample of every oscillator phase on interval k at u in [0,1].

    Interior slopes are central differences in grid units; the first and last
    intervals use one-sided second-order slopes.  Horner form keeps u=0
    bitwise equal to the stored row.
    """
    m = phases.shape[0] - 1  # number of intervals
    n = phases.shape[1]
    for i in range(n):
        p0 = phases[k, i]
        p1 = phases[k + 1, i]
        if m == 1:
            m0 = p1 - p0
            m1 = p1 - p0
        else:
            if k == 0:
                m0 = 0.5 * (-3.0 * p0 + 4.0 * p1 - phases[2, i])
            else:
                m0 = 0.5 * (p1 - phases[k - 1, i])
            if k == m - 1:
                m1 = 0.5 * (3.0 * p1 - 4.0 * p0 + phases[k - 1, i])
            else:
                m1 = 0.5 * (phases[k + 2, i] - p0)
        c2 = 3.0 * (p1 - p0) - 2.0 * m0 - m1
        c3 = 2.0 * (p0 - p1) + m0 + m1
        out[i] = p0 + u * (m0 + u * (c2 + u * c3))


@njit(cache=True, inline="always")
def _stage_index(s, two_r, m):
    """Map half-step counter s to (classical interval k, local coordinate u)."""
    k = s // two_r
    if k > m - 1:
        k = m - 1
    u = (s - k * two_r) / two_r
    return k, u


@njit(cache=True)
def evolve_xx(phases, ratio, j0, nsub, qdt, g_amp, j_coupling, periodic, u_mat,
              abort_defect):
    """Advance the XX single-particle propagator by `nsub` RK4 steps in place.

    `phases` is the classical trajectory (rows at spacing classical_dt);
    `ratio` = classical_dt / quantum_dt (integer).  Quantum step j covers
    [j*qdt, (j+1)*qdt]; j0 is the global index of the first step taken here.

    Returns (max pre-projection defect, fail_step).  fail_step is the 1-based
    local step at which the defect exceeded `abort_defect` (0 = success).
    """
    n = phases.shape[1]
    m = phases.shape[0] - 1
    two_r = 2 * ratio
    th = np.empty(n)
    g0 = np.empty(n)
    gh = np.empty(n)
    g1 = np.empty(n)
    k1 = np.empty((n, n), dtype=np.complex128)
    k2 = np.empty((n, n), dtype=np.complex128)
    k3 = np.empty((n, n), dtype=np.complex128)
    k4 = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    uc = np.empty((n, n), dtype=np.complex128)
    max_defect = 0.0
    for js in range(nsub):
        j = j0 + js
        s0 = 2 * j
        k, u = _stage_index(s0, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            g0[i] = g_amp * np.cos(th[i])
        k, u = _stage_index(s0 + 1, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            gh[i] = g_amp * np.cos(th[i])
        k, u = _stage_index(s0 + 2, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            g1[i] = g_amp * np.cos(th[i])

        _apply_xx(g0, j_coupling, periodic, u_mat, k1)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = u_mat[a, b] + 0.5 * qdt * k1[a, b]
        _apply_xx(gh, j_coupling, periodic, tmp, k2)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = u_mat[a, b] + 0.5 * qdt * k2[a, b]
        _apply_xx(gh, j_coupling, periodic, tmp, k3)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = u_mat[a, b] + qdt * k3[a, b]
        _apply_xx(g1, j_coupling, periodic, tmp, k4)
        c = qdt / 6.0
        for a in range(n):
            for b in range(n):
                u_mat[a, b] = u_mat[a, b] + c * (
                    k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])

        defect = _project_unitary(u_mat, tmp, k1, uc, 1e-10)
        if defect > max_defect:
            max_defect = defect
        if defect > abort_defect:
            return max_defect, js + 1
    return max_defect, 0


@njit(cache=True, inline="always")
def _apply_xx(g, j_coupling, periodic, v, out):
    """out = -i * h * v with h_ii = -2 g_i, h_{i,i+-1} = -2 J (tridiagonal)."""
    n = v.shape[0]
    for a in range(n):
        for b in range(n):
            acc = -2.0 * g[a] * v[a, b]
            if a > 0:
                acc += -2.0 * j_coupling * v[a - 1, b]
            if a < n - 1:
                acc += -2.0 * j_coupling * v[a + 1, b]
            if periodic:
                if a == 0:
                    acc += -2.0 * j_coupling * v[n - 1, b]
                if a == n - 1:
                    acc += -2.0 * j_coupling * v[0, b]
            out[a, b] = complex(acc.imag, -acc.real)  # multiply by -i
    return out


@njit(cache=True, inline="always")
def _gram_defect_c(u_mat, e_mat, uc):
    """e = U^+ U; returns max|e - I|."""
    n = u_mat.shape[0]
    for a in range(n):
        for b in range(n):
            uc[a, b] = np.conj(u_mat[a, b])
    np.dot(uc.T, u_mat, e_mat)
    defect = 0.0
    for a in range(n):
        for b in range(n):
            d = abs(e_mat[a, b] - (1.0 if a == b else 0.0))
            if d > defect:
                defect = d
    return defect


@njit(cache=True, inline="always")
def _project_unitary(u_mat, e_mat, scratch, uc, threshold):
    """Defect check plus conditional Newton-Schulz polar projection in place.

    The matrix is re-projected onto the nearest unitary only when the defect
    max|U^+ U - I| exceeds `threshold`.  Returns the pre-projection defect.
    """
    n = u_mat.shape[0]
    defect = _gram_defect_c(u_mat, e_mat, uc)
    cur = defect
    it = 0
    while cur > threshold and it < 4:
        # U <- U (3 I - U^+ U) / 2
        np.dot(u_mat, e_mat, scratch)
        for a in range(n):
            for b in range(n):
                u_mat[a, b] = 1.5 * u_mat[a, b] - 0.5 * scratch[a, b]
        cur = _gram_defect_c(u_mat, e_mat, uc)
        it += 1
    return defect


@njit(cache=True, inline="always")
def _apply_majorana(g, jx, periodic, v, out):
    """out = M v for the Ising Majorana flow (0-indexed rows, band <= 3).

    Row 2i:   +2 g_i v[2i+1] - 2 Jx v[2i-1]
    Row 2i+1: -2 g_i v[2i]   + 2 Jx v[2i+2]
    """
    n2 = v.shape[0]
    n = n2 // 2
    for b in range(n2):
        for i in range(n):
            acc_e = 2.0 * g[i] * v[2 * i + 1, b]
            if i > 0:
                acc_e += -2.0 * jx * v[2 * i - 1, b]
            elif periodic:
                acc_e += -2.0 * jx * v[n2 - 1, b]
            acc_o = -2.0 * g[i] * v[2 * i, b]
            if i < n - 1:
                acc_o += 2.0 * jx * v[2 * i + 2, b]
            elif periodic:
                acc_o += 2.0 * jx * v[0, b]
            out[2 * i, b] = acc_e
            out[2 * i + 1, b] = acc_o
    return out


@njit(cache=True, inline="always")
def _gram_defect_r(o_mat, e_mat):
    """e = O^T O; returns max|e - I|."""
    n = o_mat.shape[0]
    np.dot(o_mat.T, o_mat, e_mat)
    defect = 0.0
    for a in range(n):
        for b in range(n):
            d = abs(e_mat[a, b] - (1.0 if a == b else 0.0))
            if d > defect:
                defect = d
    return defect


@njit(cache=True, inline="always")
def _project_orthogonal(o_mat, e_mat, scratch, threshold):
    """Defect check plus conditional Newton-Schulz projection (real case)."""
    n = o_mat.shape[0]
    defect = _gram_defect_r(o_mat, e_mat)
    cur = defect
    it = 0
    while cur > threshold and it < 4:
        np.dot(o_mat, e_mat, scratch)
        for a in range(n):
            for b in range(n):
                o_mat[a, b] = 1.5 * o_mat[a, b] - 0.5 * scratch[a, b]
        cur = _gram_defect_r(o_mat, e_mat)
        it += 1
    return defect


@njit(cache=True)
def evolve_majorana(phases, ratio, j0, nsub, qdt, g_amp, jx, periodic, o_mat,
                    abort_defect):
    """Advance the Majorana propagator dO/dt = M(t) O by `nsub` RK4 steps."""
    n = phases.shape[1]
    n2 = 2 * n
    m = phases.shape[0] - 1
    two_r = 2 * ratio
    th = np.empty(n)
    g0 = np.empty(n)
    gh = np.empty(n)
    g1 = np.empty(n)
    k1 = np.empty((n2, n2))
    k2 = np.empty((n2, n2))
    k3 = np.empty((n2, n2))
    k4 = np.empty((n2, n2))
    tmp = np.empty((n2, n2))
    max_defect = 0.0
    for js in range(nsub):
        j = j0 + js
        s0 = 2 * j
        k, u = _stage_index(s0, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            g0[i] = g_amp * np.cos(th[i])
        k, u = _stage_index(s0 + 1, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            gh[i] = g_amp * np.cos(th[i])
        k, u = _stage_index(s0 + 2, two_r, m)
        _hermite_theta(phases, k, u, th)
        for i in range(n):
            g1[i] = g_amp * np.cos(th[i])

        _apply_majorana(g0, jx, periodic, o_mat, k1)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = o_mat[a, b] + 0.5 * qdt * k1[a, b]
        _apply_majorana(gh, jx, periodic, tmp, k2)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = o_mat[a, b] + 0.5 * qdt * k2[a, b]
        _apply_majorana(gh, jx, periodic, tmp, k3)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = o_mat[a, b] + qdt * k3[a, b]
        _apply_majorana(g1, jx, periodic, tmp, k4)
        c = qdt / 6.0
        for a in range(n2):
            for b in range(n2):
                o_mat[a, b] = o_mat[a, b] + c * (
                    k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])

        defect = _project_orthogonal(o_mat, k1, tmp, 1e-10)
        if defect > max_defect:
            max_defect = defect
        if defect > abort_defect:
            return max_defect, js + 1
    return max_defect, 0
