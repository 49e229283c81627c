"""Hot quadrature loops of the frequency-sector backend.

Each kernel evaluates one Duhamel integral directly in frequency space: an
outer Gauss-Legendre sum over the forcing time, an inner midpoint sum over
the sector carrying the data (or a pair of such sectors for the cubic term),
with the mode propagator entries and the interaction symbols inlined.  The
data is the one-sided sector indicator with zero height, so every factor
reduces to a propagator entry times a flat amplitude and the integrand is a
closed-form function of the frequencies and times.

Orientation: the true propagator feeds potential into height through
height_gain and height into potential through potential_gain.  The cubic
assembly uses the transposed orientation throughout (``swapped`` in the
quadratic kernel, always in the cubic and mixed kernels); see iterates.py.

Every kernel exists twice: a numba njit translation (parallel over output
frequencies, deterministic because each output slot is accumulated by a
single thread) and a vectorized numpy twin.  CAPWAVE_NUMBA=0 forces the
numpy path, CAPWAVE_NUMBA=1 requests numba, unset prefers numba when it is
importable.  The symbol formulas inlined in the njit bodies mirror
symbols.py; the twin-equality tests hold the copies together.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .symbols import bernoulli_symbol, transport_symbol

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in the dev environment
    _HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def numba_available() -> bool:
    return _HAVE_NUMBA


def numba_enabled() -> bool:
    """Per-call backend selection from the CAPWAVE_NUMBA environment flag."""
    flag = os.environ.get("CAPWAVE_NUMBA")
    if flag is None or flag.strip() == "":
        return _HAVE_NUMBA
    return _HAVE_NUMBA and flag.strip().lower() not in ("0", "false", "no", "off")


def _f64(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64))


# ---------------------------------------------------------------- numba path


@njit(cache=True, inline="always")
def _omega(r, g, tau):
    return math.sqrt(g * r + tau * r * r * r)


@njit(cache=True, inline="always")
def _in_sector(x, y, r, lo, hi, ang):
    if r < lo or r > hi:
        return False
    return abs(math.atan2(y, x)) <= ang


@njit(cache=True, parallel=True)
def _quad_numba(
    out_x, out_y, in_x, in_y, in_w, lo, hi, ang, amp, g, tau, tv, nodes, weights, swapped
):
    P = out_x.size
    K = in_x.size
    M, J = nodes.shape
    amp2 = amp * amp
    re = np.empty(K)
    we = np.empty(K)
    for k in range(K):
        re[k] = math.hypot(in_x[k], in_y[k])
        we[k] = _omega(re[k], g, tau)
    # datum-factor cosines depend on the inner point only; hoist them
    le1 = np.empty((K, M, J))
    for k in range(K):
        for m in range(M):
            for j in range(J):
                le1[k, m, j] = math.cos(we[k] * nodes[m, j])
    out_h = np.empty((M, P))
    out_p = np.empty((M, P))
    for p in prange(P):
        ox = out_x[p]
        oy = out_y[p]
        ro = math.hypot(ox, oy)
        wo = _omega(ro, g, tau)
        s1 = np.zeros((M, J))
        s2 = np.zeros((M, J))
        for k in range(K):
            zx = ox - in_x[k]
            zy = oy - in_y[k]
            rz = math.hypot(zx, zy)
            if not _in_sector(zx, zy, rz, lo, hi, ang):
                continue
            m1 = ox * in_x[k] + oy * in_y[k] - ro * re[k]
            m2 = 0.5 * (zx * in_x[k] + zy * in_y[k] + rz * re[k])
            c1 = in_w[k] * amp2 * m1
            c2 = in_w[k] * amp2 * m2
            wz = _omega(rz, g, tau)
            rest_z = g + tau * rz * rz
            for m in range(M):
                for j in range(J):
                    tp = nodes[m, j]
                    soz = math.sin(wz * tp) / wz
                    hz = -rest_z * soz if swapped else rz * soz
                    s1[m, j] += c1 * hz * le1[k, m, j]
                    s2[m, j] += c2 * math.cos(wz * tp) * le1[k, m, j]
        rest_o = g + tau * ro * ro
        for m in range(M):
            acc_h = 0.0
            acc_p = 0.0
            for j in range(J):
                dt = tv[m] - nodes[m, j]
                coso = math.cos(wo * dt)
                soo = math.sin(wo * dt) / wo
                gain_hp = -rest_o * soo if swapped else ro * soo
                gain_ph = ro * soo if swapped else -rest_o * soo
                acc_h += weights[m, j] * (coso * s1[m, j] + gain_hp * s2[m, j])
                acc_p += weights[m, j] * (gain_ph * s1[m, j] + coso * s2[m, j])
            out_h[m, p] = acc_h
            out_p[m, p] = acc_p
    return out_h, out_p


@njit(cache=True, parallel=True)
def _cubic_numba(out_x, out_y, in_x, in_y, in_w, lo, hi, ang, amp, g, tau, tv, nodes, weights):
    P = out_x.size
    K = in_x.size
    M, J = nodes.shape
    amp3 = amp * amp * amp
    rk = np.empty(K)
    wk = np.empty(K)
    for k in range(K):
        rk[k] = math.hypot(in_x[k], in_y[k])
        wk[k] = _omega(rk[k], g, tau)
    # propagator factors of the two explicit sector slots, per inner point
    l1 = np.empty((K, M, J))
    l3 = np.empty((K, M, J))
    for k in range(K):
        rest = g + tau * rk[k] * rk[k]
        for m in range(M):
            for j in range(J):
                ph = wk[k] * nodes[m, j]
                l1[k, m, j] = math.cos(ph)
                l3[k, m, j] = -rest * math.sin(ph) / wk[k]
    out_h = np.empty((M, P))
    out_p = np.empty((M, P))
    for p in prange(P):
        ox = out_x[p]
        oy = out_y[p]
        ro = math.hypot(ox, oy)
        wo = _omega(ro, g, tau)
        sc1 = np.zeros((M, J))
        sc2 = np.zeros((M, J))
        for kn in range(K):
            nx = in_x[kn]
            ny = in_y[kn]
            rn = rk[kn]
            rmix1 = math.hypot(ox - nx, oy - ny)
            for ke in range(K):
                ex = in_x[ke]
                ey = in_y[ke]
                bx = ox - nx - ex
                by = oy - ny - ey
                rb = math.hypot(bx, by)
                if not _in_sector(bx, by, rb, lo, hi, ang):
                    continue
                re_ = rk[ke]
                p1 = -3.0 * ro * re_ * (ro + re_ - 2.0 * rmix1)
                p21 = 6.0 * re_ * (rn * rn - math.hypot(ox - ex, oy - ey) * rn)
                p22 = (
                    -9.0 * tau * (bx * nx * ex * ex + by * ny * ey * ey)
                    - 3.0 * tau * (bx * nx * ey * ey + by * ny * ex * ex)
                    - 12.0 * tau * (bx * ny * ex * ey)
                )
                c = in_w[kn] * in_w[ke] * amp3
                wb = _omega(rb, g, tau)
                rest_b = g + tau * rb * rb
                for m in range(M):
                    for j in range(J):
                        l3b = -rest_b * math.sin(wb * nodes[m, j]) / wb
                        sc1[m, j] += c * p1 * l3b * l3[kn, m, j] * l1[ke, m, j]
                        sc2[m, j] += c * l3b * (
                            p21 * l1[kn, m, j] * l1[ke, m, j]
                            + p22 * l3[kn, m, j] * l3[ke, m, j]
                        )
        rest_o = g + tau * ro * ro
        for m in range(M):
            acc_h = 0.0
            acc_p = 0.0
            for j in range(J):
                dt = tv[m] - nodes[m, j]
                coso = math.cos(wo * dt)
                soo = math.sin(wo * dt) / wo
                acc_h += weights[m, j] * (coso * sc1[m, j] - rest_o * soo * sc2[m, j])
                acc_p += weights[m, j] * (ro * soo * sc1[m, j] + coso * sc2[m, j])
            out_h[m, p] = acc_h
            out_p[m, p] = acc_p
    return out_h, out_p


@njit(cache=True, parallel=True)
def _qtilde_numba(
    out_x, out_y, q_x, q_y, q_w, h2, psi2, lo, hi, ang, amp, g, tau, tv, nodes, weights
):
    P = out_x.size
    K = q_x.size
    M, J = nodes.shape
    out_h = np.empty((M, P))
    out_p = np.empty((M, P))
    for p in prange(P):
        ox = out_x[p]
        oy = out_y[p]
        ro = math.hypot(ox, oy)
        wo = _omega(ro, g, tau)
        t1 = np.zeros((M, J))
        t2 = np.zeros((M, J))
        for k in range(K):
            zx = ox - q_x[k]
            zy = oy - q_y[k]
            rz = math.hypot(zx, zy)
            if not _in_sector(zx, zy, rz, lo, hi, ang):
                continue
            rq = math.hypot(q_x[k], q_y[k])
            m1a = ox * q_x[k] + oy * q_y[k] - ro * rq
            m1b = ox * zx + oy * zy - ro * rz
            m2 = 0.5 * (zx * q_x[k] + zy * q_y[k] + rz * rq)
            wz = _omega(rz, g, tau)
            rest_z = g + tau * rz * rz
            for m in range(M):
                for j in range(J):
                    ph = wz * nodes[m, j]
                    h1 = -rest_z * math.sin(ph) / wz * amp
                    psi1 = math.cos(ph) * amp
                    t1[m, j] += q_w[k] * (m1a * h1 * psi2[m, j, k] + m1b * h2[m, j, k] * psi1)
                    t2[m, j] += q_w[k] * 2.0 * m2 * psi1 * psi2[m, j, k]
        rest_o = g + tau * ro * ro
        for m in range(M):
            acc_h = 0.0
            acc_p = 0.0
            for j in range(J):
                dt = tv[m] - nodes[m, j]
                coso = math.cos(wo * dt)
                soo = math.sin(wo * dt) / wo
                acc_h += weights[m, j] * (coso * t1[m, j] - rest_o * soo * t2[m, j])
                acc_p += weights[m, j] * (ro * soo * t1[m, j] + coso * t2[m, j])
            out_h[m, p] = acc_h
            out_p[m, p] = acc_p
    return out_h, out_p


# ---------------------------------------------------------------- numpy path


def _alive_pairs(out_x, out_y, in_x, in_y, lo, hi, ang):
    """Indices and geometry of the inner points whose difference frequency
    lands in the sector, for a block of output frequencies."""
    zx = out_x[:, None] - in_x[None, :]
    zy = out_y[:, None] - in_y[None, :]
    rz = np.hypot(zx, zy)
    alive = (rz >= lo) & (rz <= hi) & (np.abs(np.arctan2(zy, zx)) <= ang)
    row, col = np.nonzero(alive)
    return row, col, zx[row, col], zy[row, col], rz[row, col]


def _quad_numpy(
    out_x, out_y, in_x, in_y, in_w, lo, hi, ang, amp, g, tau, tv, nodes, weights, swapped
):
    P = out_x.size
    M, J = nodes.shape
    re = np.hypot(in_x, in_y)
    we = np.sqrt(g * re + tau * re**3)
    out_h = np.zeros((M, P))
    out_p = np.zeros((M, P))
    chunk = max(1, 2_000_000 // max(in_x.size, 1))
    for a in range(0, P, chunk):
        b = min(P, a + chunk)
        ox = out_x[a:b]
        oy = out_y[a:b]
        C = b - a
        row, col, zxv, zyv, rzv = _alive_pairs(ox, oy, in_x, in_y, lo, hi, ang)
        ro = np.hypot(ox, oy)
        wo = np.sqrt(g * ro + tau * ro**3)
        if row.size:
            m1 = transport_symbol(ox[row], oy[row], in_x[col], in_y[col])
            m2 = bernoulli_symbol(ox[row], oy[row], in_x[col], in_y[col])
            c1 = in_w[col] * amp * amp * m1
            c2 = in_w[col] * amp * amp * m2
            wz = np.sqrt(g * rzv + tau * rzv**3)
            rest_z = g + tau * rzv * rzv
            wev = we[col]
        for m in range(M):
            s1 = np.zeros((J, C))
            s2 = np.zeros((J, C))
            if row.size:
                for j in range(J):
                    tp = nodes[m, j]
                    soz = np.sin(wz * tp) / wz
                    hz = -rest_z * soz if swapped else rzv * soz
                    cos_e = np.cos(wev * tp)
                    s1[j] = np.bincount(row, weights=c1 * hz * cos_e, minlength=C)
                    s2[j] = np.bincount(row, weights=c2 * np.cos(wz * tp) * cos_e, minlength=C)
            dt = tv[m] - nodes[m]
            coso = np.cos(wo[None, :] * dt[:, None])
            soo = np.sin(wo[None, :] * dt[:, None]) / wo[None, :]
            l2o = ro[None, :] * soo
            l3o = -(g + tau * ro * ro)[None, :] * soo
            gain_hp = l3o if swapped else l2o
            gain_ph = l2o if swapped else l3o
            wj = weights[m][:, None]
            out_h[m, a:b] = np.sum(wj * (coso * s1 + gain_hp * s2), axis=0)
            out_p[m, a:b] = np.sum(wj * (gain_ph * s1 + coso * s2), axis=0)
    return out_h, out_p


def _cubic_numpy(out_x, out_y, in_x, in_y, in_w, lo, hi, ang, amp, g, tau, tv, nodes, weights):
    from .symbols import cubic_bernoulli_symbol, cubic_height_symbol, curvature_symbol

    P = out_x.size
    K = in_x.size
    M, J = nodes.shape
    MJ = M * J
    tp = nodes.reshape(MJ)
    rk = np.hypot(in_x, in_y)
    wk = np.sqrt(g * rk + tau * rk**3)
    ph = wk[:, None] * tp[None, :]
    l1 = np.cos(ph)
    l3 = -(g + tau * rk * rk)[:, None] * np.sin(ph) / wk[:, None]
    # flattened (nu, eta) pair lattice shared by every output point
    nu_idx = np.repeat(np.arange(K), K)
    eta_idx = np.tile(np.arange(K), K)
    px = in_x[nu_idx] + in_x[eta_idx]
    py = in_y[nu_idx] + in_y[eta_idx]
    pw = in_w[nu_idx] * in_w[eta_idx] * amp**3
    out_h = np.empty((M, P))
    out_p = np.empty((M, P))
    for p in range(P):
        ox = out_x[p]
        oy = out_y[p]
        ro = math.hypot(ox, oy)
        wo = math.sqrt(g * ro + tau * ro**3)
        bx = ox - px
        by = oy - py
        rb = np.hypot(bx, by)
        alive = (rb >= lo) & (rb <= hi) & (np.abs(np.arctan2(by, bx)) <= ang)
        (idx,) = np.nonzero(alive)
        sc1 = np.zeros(MJ)
        sc2 = np.zeros(MJ)
        if idx.size:
            ni = nu_idx[idx]
            ei = eta_idx[idx]
            nxv = in_x[ni]
            nyv = in_y[ni]
            exv = in_x[ei]
            eyv = in_y[ei]
            p1 = cubic_height_symbol(ox, oy, nxv, nyv, exv, eyv)
            p21 = cubic_bernoulli_symbol(ox, oy, nxv, nyv, exv, eyv)
            p22 = curvature_symbol(ox, oy, nxv, nyv, exv, eyv, tau)
            c = pw[idx]
            rbv = rb[idx]
            wb = np.sqrt(g * rbv + tau * rbv**3)
            l3b = -(g + tau * rbv * rbv)[:, None] * np.sin(wb[:, None] * tp[None, :]) / wb[:, None]
            l1n = l1[ni]
            l3n = l3[ni]
            l1e = l1[ei]
            l3e = l3[ei]
            sc1 = np.einsum("a,aq,aq,aq->q", c * p1, l3b, l3n, l1e)
            sc2 = np.einsum("a,aq,aq,aq->q", c * p21, l3b, l1n, l1e) + np.einsum(
                "a,aq,aq,aq->q", c * p22, l3b, l3n, l3e
            )
        sc1 = sc1.reshape(M, J)
        sc2 = sc2.reshape(M, J)
        dt = tv[:, None] - nodes
        coso = np.cos(wo * dt)
        soo = np.sin(wo * dt) / wo
        out_h[:, p] = np.sum(weights * (coso * sc1 - (g + tau * ro * ro) * soo * sc2), axis=1)
        out_p[:, p] = np.sum(weights * (ro * soo * sc1 + coso * sc2), axis=1)
    return out_h, out_p


def _qtilde_numpy(
    out_x, out_y, q_x, q_y, q_w, h2, psi2, lo, hi, ang, amp, g, tau, tv, nodes, weights
):
    P = out_x.size
    M, J = nodes.shape
    MJ = M * J
    tp = nodes.reshape(MJ)
    rq = np.hypot(q_x, q_y)
    out_h = np.empty((M, P))
    out_p = np.empty((M, P))
    h2f = h2.reshape(MJ, q_x.size)
    psi2f = psi2.reshape(MJ, q_x.size)
    for p in range(P):
        ox = out_x[p]
        oy = out_y[p]
        ro = math.hypot(ox, oy)
        wo = math.sqrt(g * ro + tau * ro**3)
        zx = ox - q_x
        zy = oy - q_y
        rz = np.hypot(zx, zy)
        alive = (rz >= lo) & (rz <= hi) & (np.abs(np.arctan2(zy, zx)) <= ang)
        (idx,) = np.nonzero(alive)
        t1 = np.zeros(MJ)
        t2 = np.zeros(MJ)
        if idx.size:
            m1a = transport_symbol(ox, oy, q_x[idx], q_y[idx])
            m1b = transport_symbol(ox, oy, zx[idx], zy[idx])
            m2 = bernoulli_symbol(ox, oy, q_x[idx], q_y[idx])
            rzv = rz[idx]
            wz = np.sqrt(g * rzv + tau * rzv**3)
            ph = wz[:, None] * tp[None, :]
            h1 = -(g + tau * rzv * rzv)[:, None] * np.sin(ph) / wz[:, None] * amp
            psi1 = np.cos(ph) * amp
            w = q_w[idx]
            t1 = np.einsum(
                "a,aq->q", w * m1a, h1 * psi2f[:, idx].T
            ) + np.einsum("a,aq->q", w * m1b, h2f[:, idx].T * psi1)
            t2 = 2.0 * np.einsum("a,aq->q", w * m2, psi1 * psi2f[:, idx].T)
        t1 = t1.reshape(M, J)
        t2 = t2.reshape(M, J)
        dt = tv[:, None] - nodes
        coso = np.cos(wo * dt)
        soo = np.sin(wo * dt) / wo
        out_h[:, p] = np.sum(weights * (coso * t1 - (g + tau * ro * ro) * soo * t2), axis=1)
        out_p[:, p] = np.sum(weights * (ro * soo * t1 + coso * t2), axis=1)
    return out_h, out_p


# ----------------------------------------------------------------- dispatch


def quad_sector_spectrum(
    out_x,
    out_y,
    in_x,
    in_y,
    in_w,
    support,
    amplitude: float,
    gravity: float,
    tension: float,
    t_values,
    node_matrix,
    weight_matrix,
    swapped: bool = False,
):
    """Second-order Duhamel spectrum at each (output time, output frequency).

    support is the (r_lo, r_hi, half_angle) window of the datum sector; the
    bare bilinear integral is returned, without the variation's factor 2.
    """
    args = (
        _f64(out_x),
        _f64(out_y),
        _f64(in_x),
        _f64(in_y),
        _f64(in_w),
        float(support[0]),
        float(support[1]),
        float(support[2]),
        float(amplitude),
        float(gravity),
        float(tension),
        _f64(t_values),
        _f64(node_matrix),
        _f64(weight_matrix),
        bool(swapped),
    )
    fn = _quad_numba if numba_enabled() else _quad_numpy
    return fn(*args)


def cubic_sector_spectrum(
    out_x,
    out_y,
    in_x,
    in_y,
    in_w,
    support,
    amplitude: float,
    gravity: float,
    tension: float,
    t_values,
    node_matrix,
    weight_matrix,
):
    """Third-order pure-cubic Duhamel spectrum, transposed orientation."""
    args = (
        _f64(out_x),
        _f64(out_y),
        _f64(in_x),
        _f64(in_y),
        _f64(in_w),
        float(support[0]),
        float(support[1]),
        float(support[2]),
        float(amplitude),
        float(gravity),
        float(tension),
        _f64(t_values),
        _f64(node_matrix),
        _f64(weight_matrix),
    )
    fn = _cubic_numba if numba_enabled() else _cubic_numpy
    return fn(*args)


def qtilde_sector_spectrum(
    out_x,
    out_y,
    q_x,
    q_y,
    q_w,
    h2_table,
    psi2_table,
    support,
    amplitude: float,
    gravity: float,
    tension: float,
    t_values,
    node_matrix,
    weight_matrix,
):
    """Mixed first-times-second-order Duhamel spectrum, transposed orientation.

    h2_table / psi2_table hold the second iterate on the quadrature grid of
    its own support, indexed (output time, outer node, grid point); the
    first-order factor is reconstructed in closed form at the difference
    frequency.  The dimensional weight of the mixed variation is applied by
    the caller.
    """
    args = (
        _f64(out_x),
        _f64(out_y),
        _f64(q_x),
        _f64(q_y),
        _f64(q_w),
        _f64(h2_table),
        _f64(psi2_table),
        float(support[0]),
        float(support[1]),
        float(support[2]),
        float(amplitude),
        float(gravity),
        float(tension),
        _f64(t_values),
        _f64(node_matrix),
        _f64(weight_matrix),
    )
    fn = _qtilde_numba if numba_enabled() else _qtilde_numpy
    return fn(*args)
