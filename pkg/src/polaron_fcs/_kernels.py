"""Compiled integrator for the tilted master equation.

The state is the 2x2 operator K stored as four complex numbers
(K00, K01, K10, K11) in the computational basis.  The generator is evaluated
in the instantaneous eigenbasis, where the secular dissipator is diagonal:

    d K++ = G_up K-- - G_dn K++,         d K-- = -d K++,
    d K+- = (-i W - (G_up + G_dn)/2 - 2 G_0) K+-,   d K-+ = conj-structure,

with G_up = sum_a |m_a|^2 gamma_aa(-w), G_dn = sum_a |m_a|^2 gamma_aa(w) and
W = w plus the Lamb shift.  The work generator acts from the left.

All parameters are passed explicitly so the functions compile once.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numba import njit

MODE_POLARON = 0
MODE_WEAK = 1

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAXSTEPS = 3
STATUS_WINDOW = 4

METHOD_RK45 = 0
METHOD_RK4 = 1

COL_GXX, COL_GYY, COL_SXX, COL_SYY = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def ppoly_eval(x, coef, col, w):
    """Evaluate column ``col`` of a cubic piecewise polynomial (scipy PPoly layout)."""
    n = x.shape[0]
    if w < x[0] or w > x[n - 1]:
        return math.nan
    i = np.searchsorted(x, w, side="right") - 1
    if i > n - 2:
        i = n - 2
    if i < 0:
        i = 0
    d = w - x[i]
    return ((coef[col, 0, i] * d + coef[col, 1, i]) * d + coef[col, 2, i]) * d + coef[col, 3, i]


@njit(cache=True, nogil=True)
def _expm1c(z):
    if abs(z) < 1e-5:
        return z * (1.0 + z * (0.5 + z / 6.0))
    return cmath.exp(z) - 1.0


@njit(cache=True, nogil=True)
def geometry(t, nu, delta, k_eff):
    """(cos theta, sin theta, omega, dtheta/dt, domega/dt) for w0 = nu t."""
    w0 = nu * t
    gap = k_eff * delta
    omega = math.hypot(w0, gap)
    return w0 / omega, gap / omega, omega, -gap * nu / (omega * omega), nu * nu * t / omega


@njit(cache=True, nogil=True)
def half_angles(cos_t, sin_t):
    if cos_t >= 0.0:
        c = math.sqrt(0.5 * (1.0 + cos_t))
        s = sin_t / (2.0 * c)
    else:
        s = math.sqrt(0.5 * (1.0 - cos_t))
        c = sin_t / (2.0 * s)
    return c, s


@njit(cache=True, nogil=True)
def rhs_eval(t, y, out, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef):
    """out = L_t[K] + M(t, eta) K.  Returns False if a rate lookup left the table."""
    cos_t, sin_t, omega, dth, dom = geometry(t, nu, delta, k_eff)
    c, s = half_angles(cos_t, sin_t)

    # rotate to the eigenbasis: Ke = V^T K V with V = [[c, -s], [s, c]]
    a00 = c * y[0] + s * y[2]
    a01 = c * y[1] + s * y[3]
    a10 = -s * y[0] + c * y[2]
    a11 = -s * y[1] + c * y[3]
    kpp = a00 * c + a01 * s
    kpm = -a00 * s + a01 * c
    kmp = a10 * c + a11 * s
    kmm = -a10 * s + a11 * c

    gxx_up = ppoly_eval(x, coef, COL_GXX, -omega)
    gxx_dn = ppoly_eval(x, coef, COL_GXX, omega)
    if math.isnan(gxx_up) or math.isnan(gxx_dn):
        return False
    if mode == MODE_POLARON:
        h2 = 0.25 * delta * delta
        mx2 = h2 * cos_t * cos_t
        my2 = h2
        g0 = h2 * sin_t * sin_t * gxx0
        gyy_up = ppoly_eval(x, coef, COL_GYY, -omega)
        gyy_dn = ppoly_eval(x, coef, COL_GYY, omega)
    else:
        mx2 = sin_t * sin_t
        my2 = 0.0
        g0 = 0.0
        gyy_up = 0.0
        gyy_dn = 0.0
    g_up = mx2 * gxx_up + my2 * gyy_up
    g_dn = mx2 * gxx_dn + my2 * gyy_dn
    w_eff = omega
    if lamb_on:
        w_eff += mx2 * (ppoly_eval(x, coef, COL_SXX, omega) - ppoly_eval(x, coef, COL_SXX, -omega))
        if mode == MODE_POLARON:
            w_eff += my2 * (ppoly_eval(x, coef, COL_SYY, omega) - ppoly_eval(x, coef, COL_SYY, -omega))
    decay = 0.5 * (g_up + g_dn) + 2.0 * g0

    dpp = g_up * kmm - g_dn * kpp
    dmm = -dpp
    dpm = (-1j * w_eff - decay) * kpm
    dmp = (1j * w_eff - decay) * kmp

    if eta != 0:
        m_pp = 0.5j * eta * dom
        m_pm = 0.5 * dth * _expm1c(1j * eta * omega)
        m_mp = -0.5 * dth * _expm1c(-1j * eta * omega)
        dpp += m_pp * kpp + m_pm * kmp
        dpm += m_pp * kpm + m_pm * kmm
        dmp += m_mp * kpp - m_pp * kmp
        dmm += m_mp * kpm - m_pp * kmm

    # back to the computational basis: V D V^T
    b00 = c * dpp - s * dmp
    b01 = c * dpm - s * dmm
    b10 = s * dpp + c * dmp
    b11 = s * dpm + c * dmm
    out[0] = b00 * c - b01 * s
    out[1] = b00 * s + b01 * c
    out[2] = b10 * c - b11 * s
    out[3] = b10 * s + b11 * c
    return True


# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0


@njit(cache=True, nogil=True)
def integrate(y0, t0, t1, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef,
              method, h0, rtol, max_step, max_steps):
    """Integrate from t0 to t1 in place on y0.

    Returns (status, t_reached, n_steps).  The step is capped at
    min(max_step, 0.1 / (1 + |eta| nu)) to resolve the counting-field phase.
    """
    y = y0
    k1 = np.empty(4, dtype=np.complex128)
    k2 = np.empty(4, dtype=np.complex128)
    k3 = np.empty(4, dtype=np.complex128)
    k4 = np.empty(4, dtype=np.complex128)
    k5 = np.empty(4, dtype=np.complex128)
    k6 = np.empty(4, dtype=np.complex128)
    k7 = np.empty(4, dtype=np.complex128)
    tmp = np.empty(4, dtype=np.complex128)
    y5 = np.empty(4, dtype=np.complex128)

    cap = min(max_step, 0.1 / (1.0 + abs(eta) * nu))
    h = min(h0, cap)
    t = t0
    n = 0
    span = t1 - t0

    if method == METHOD_RK4:
        n_fixed = int(math.ceil(span / h - 1e-12))
        h = span / n_fixed
        for j in range(n_fixed):
            t = t0 + j * h
            if not rhs_eval(t, y, k1, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef):
                return STATUS_WINDOW, t, j
            for i in range(4):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            rhs_eval(t + 0.5 * h, tmp, k2, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
            for i in range(4):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            rhs_eval(t + 0.5 * h, tmp, k3, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
            for i in range(4):
                tmp[i] = y[i] + h * k3[i]
            rhs_eval(t + h, tmp, k4, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
            for i in range(4):
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not (math.isfinite(y[i].real) and math.isfinite(y[i].imag)):
                    return STATUS_NONFINITE, t + h, j + 1
        return STATUS_OK, t1, n_fixed

    if not rhs_eval(t, y, k1, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef):
        return STATUS_WINDOW, t, 0
    h_min = 1e-12 * max(abs(span), 1.0)
    while t < t1:
        if n >= max_steps:
            return STATUS_MAXSTEPS, t, n
        last = False
        if t + h >= t1:
            h = t1 - t
            last = True
        for i in range(4):
            tmp[i] = y[i] + h * _A21 * k1[i]
        ok = rhs_eval(t + _C2 * h, tmp, k2, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        for i in range(4):
            tmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        ok &= rhs_eval(t + _C3 * h, tmp, k3, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        for i in range(4):
            tmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        ok &= rhs_eval(t + _C4 * h, tmp, k4, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        for i in range(4):
            tmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        ok &= rhs_eval(t + _C5 * h, tmp, k5, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        for i in range(4):
            tmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        ok &= rhs_eval(t + h, tmp, k6, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        for i in range(4):
            y5[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
        ok &= rhs_eval(t + h, y5, k7, eta, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef)
        if not ok:
            return STATUS_WINDOW, t, n
        ymax = 0.0
        for i in range(4):
            ymax = max(ymax, abs(y[i]), abs(y5[i]))
        scale = rtol * ymax + 1e-14
        err = 0.0
        for i in range(4):
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            err = max(err, abs(e) / scale)
        if not math.isfinite(err):
            return STATUS_NONFINITE, t, n
        if err <= 1.0:
            t = t1 if last else t + h
            for i in range(4):
                y[i] = y5[i]
                k1[i] = k7[i]
            n += 1
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = min(h * fac, cap)
        if h < h_min and t < t1:
            return STATUS_UNDERFLOW, t, n
    return STATUS_OK, t, n


@njit(cache=True, nogil=True)
def sample_chunk(etas, y_init, t0, t1, nu, delta, k_eff, mode, lamb_on, gxx0, x, coef,
                 method, h0, rtol, max_step, max_steps, phi, status, t_fail):
    """Trace of K(t1, eta) for each eta in the chunk; K(t0) = y_init."""
    y = np.empty(4, dtype=np.complex128)
    for j in range(etas.shape[0]):
        for i in range(4):
            y[i] = y_init[i]
        st, tr, _ = integrate(y, t0, t1, etas[j], nu, delta, k_eff, mode, lamb_on, gxx0, x, coef,
                              method, h0, rtol, max_step, max_steps)
        status[j] = st
        t_fail[j] = tr
        phi[j] = y[0] + y[3]
