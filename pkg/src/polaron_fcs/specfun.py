"""Special functions used by the bath machinery."""

import numpy as np

# Bernoulli numbers B_2 .. B_16 for the asymptotic trigamma series.
_BERNOULLI = np.array([
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
])

_SHIFT_THRESHOLD = 10.0
_POLE_TOL = 1e-12


def _trigamma_asymptotic(z):
    # psi1(z) ~ 1/z + 1/(2 z^2) + sum_k B_2k / z^(2k+1), valid for Re z >= 10
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for b in _BERNOULLI[::-1]:
        series = series * inv2 + b
    return inv + 0.5 * inv2 + series * inv2 * inv


def trigamma(z):
    """Complex trigamma function psi^(1)(z).

    Uses the upward recurrence psi1(z) = psi1(z+1) + 1/z^2 until Re(z) >= 10,
    then the asymptotic Bernoulli series.  Accepts scalars or arrays.

    Raises
    ------
    ValueError
        If any argument lies within 1e-12 of a non-positive integer.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()

    nearest = np.round(z.real)
    pole = (nearest <= 0) & (np.abs(z - nearest) < _POLE_TOL)
    if np.any(pole):
        raise ValueError(f"trigamma has a pole at {z[pole][0]}")

    acc = np.zeros_like(z)
    n_shift = np.maximum(0, np.ceil(_SHIFT_THRESHOLD - z.real)).astype(int)
    for k in range(int(n_shift.max(initial=0))):
        active = n_shift > k
        zk = z[active]
        acc[active] += 1.0 / (zk * zk)
        z[active] = zk + 1.0
    out = acc + _trigamma_asymptotic(z)
    return out[0] if scalar else out


def bose_occupation(omega, beta):
    """Bose-Einstein occupation N(omega) = 1 / (exp(beta*omega) - 1).

    For |beta*omega| < 1e-8 the series 1/(beta*omega) - 1/2 is used.
    Satisfies N(-omega) = -(1 + N(omega)).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = beta * np.asarray(omega, dtype=float)
    if np.any(x == 0.0):
        raise ValueError("Bose occupation is singular at omega = 0")
    small = np.abs(x) < 1e-8
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = np.where(small, 1.0 / x - 0.5, 1.0 / np.expm1(x))
    return out[()] if out.ndim == 0 else out
