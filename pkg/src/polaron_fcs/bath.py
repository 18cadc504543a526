"""Reservoir quantities: spectral density, polaron renormalisation, correlation
functions, emission/absorption rates and Lamb-shift integrals.

The reservoir has the super-Ohmic spectral density

    J(w) = alpha * w**3 / omega_c**2 * exp(-w / omega_c)

and enters the polaron-frame dissipator through the displacement-operator
correlation functions

    C_xx(t) = kappa**2 (cosh phi(t) - 1),    C_yy(t) = kappa**2 sinh phi(t),

with the bath propagator phi(t).  Rates are gamma(w) = int dt exp(i w t) C(t)
and the Lamb-shift integrals are S(w) = (1/2 pi) p.v. int dw' gamma(w')/(w - w').
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

from .specfun import trigamma

CHANNELS = ("xx", "yy")


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class TailTruncationWarning(RuntimeWarning):
    """Truncated spectral tails contribute more than the requested tolerance."""


@dataclass(frozen=True)
class BathParams:
    """Reservoir description.

    alpha : coupling strength, omega_c : cutoff frequency, beta : inverse temperature.
    """

    alpha: float
    omega_c: float
    beta: float
    include_lamb_shift: bool = True

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def epsilon(self) -> float:
        return 1.0 / (self.beta * self.omega_c)


def spectral_density(omega, bath: BathParams):
    """J(w) for w >= 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    out = bath.alpha * omega**3 / bath.omega_c**2 * np.exp(-omega / bath.omega_c)
    return out[()] if out.ndim == 0 else out


def kappa(bath: BathParams) -> float:
    """Polaron renormalisation constant, closed form via the trigamma function."""
    eps = bath.epsilon
    return math.exp(-2.0 * bath.alpha * (2.0 * eps**2 * trigamma(eps).real - 1.0))


def bath_propagator(t, bath: BathParams):
    """phi(t) = -4 alpha [(1 - i wc t)^-2 - eps^2 (psi1(eps + i t/beta) + psi1(eps - i t/beta))]."""
    t = np.asarray(t, dtype=float)
    eps = bath.epsilon
    x = 1j * t / bath.beta
    out = -4.0 * bath.alpha * (
        (1.0 - 1j * bath.omega_c * t) ** -2 - eps**2 * (trigamma(eps + x) + trigamma(eps - x))
    )
    return out[()] if out.ndim == 0 else out


def corr(t, channel: str, bath: BathParams, kappa_value: float | None = None):
    """Correlation function C_aa(t) of the polaron-frame bath operators."""
    k2 = (kappa(bath) if kappa_value is None else kappa_value) ** 2
    phi = bath_propagator(t, bath)
    if channel == "xx":
        return k2 * (np.cosh(phi) - 1.0)
    if channel == "yy":
        return k2 * np.sinh(phi)
    raise ValueError(f"unknown channel {channel!r}")


def correlation_time(bath: BathParams, threshold: float = 1e-10) -> float:
    """Integration cutoff tau_max for the rate integrals.

    Smallest tau with |phi(tau)| < threshold, capped at 50 max(1/omega_c, beta).
    """
    cap = 50.0 * max(1.0 / bath.omega_c, bath.beta)
    if bath.alpha == 0:
        return cap
    taus = np.geomspace(1e-3 / bath.omega_c, cap, 4000)
    above = np.nonzero(np.abs(bath_propagator(taus, bath)) >= threshold)[0]
    if above.size == 0:
        return float(taus[0])
    last = above[-1]
    return float(taus[last + 1]) if last + 1 < taus.size else cap


def _one_phonon_spectrum(omega, bath: BathParams):
    # Fourier transform of phi(t): 8 pi J(w)/w^2 (1 + N(w)), J extended as an odd function.
    omega = np.asarray(omega, dtype=float)
    pref = 8.0 * np.pi * bath.alpha / bath.omega_c**2
    x = bath.beta * omega
    with np.errstate(invalid="ignore", divide="ignore"):
        # w (1 + N(w)) = w / (1 - exp(-beta w)), smooth through w = 0
        g = np.where(np.abs(x) < 1e-12, 1.0 / bath.beta, omega / -np.expm1(-x))
    return pref * g * np.exp(-np.abs(omega) / bath.omega_c)


def weak_coupling_rate(omega, bath: BathParams):
    """Weak-coupling rate 2 pi J(w) (1 + N(w)); for w < 0 this is 2 pi J(|w|) N(|w|)."""
    omega = np.asarray(omega, dtype=float)
    x = bath.beta * omega
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(np.abs(x) < 1e-12, 1.0 / bath.beta, omega / -np.expm1(-x))
    out = 2.0 * np.pi * bath.alpha / bath.omega_c**2 * omega**2 * g * np.exp(-np.abs(omega) / bath.omega_c)
    return out[()] if out.ndim == 0 else out


# Gauss-Kronrod 7/15 rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _remainder_correlations(tau, bath, kappa_value):
    # C_xx and C_yy with the one-phonon term kappa^2 phi removed from C_yy; that
    # term decays only as 1/tau^2 and is transformed analytically instead.
    phi = bath_propagator(tau, bath)
    k2 = kappa_value**2
    return k2 * (np.cosh(phi) - 1.0), k2 * (np.sinh(phi) - phi)


def _half_fourier(omega, bath, kappa_value, tau_max, rtol, atol, max_iter=60, max_panels=20000):
    """int_0^tau_max exp(i w t) C(t) dt for both channels by adaptive G7K15."""
    if abs(omega) * tau_max > 10:
        n0 = int(math.ceil(tau_max * abs(omega) / math.pi))
    else:
        n0 = 8
    edges = np.linspace(0.0, tau_max, n0 + 1)
    a, b = edges[:-1], edges[1:]
    done = np.zeros(2, dtype=complex)
    err_done = 0.0
    analytic = np.array([0.0, kappa_value**2 * float(_one_phonon_spectrum(omega, bath))])
    for _ in range(max_iter):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        tau = mid[:, None] + half[:, None] * _GK_NODES[None, :]
        cxx, cyy = _remainder_correlations(tau, bath, kappa_value)
        phase = np.exp(1j * omega * tau)
        vals = np.stack([cxx * phase, cyy * phase])
        kron = half * (vals @ _GK_WEIGHTS)
        gauss = half * (vals @ _G_WEIGHTS)
        err = np.max(np.abs(kron - gauss), axis=0)
        estimate = 2.0 * (done + kron.sum(axis=1)).real + analytic
        tol = np.maximum(atol, rtol * np.abs(estimate)).min()
        # round-off floor: K-G cannot resolve below a few ulps of the panel integral magnitude
        floor = 50.0 * np.finfo(float).eps * half * np.max(np.abs(vals), axis=(0, 2))
        ok = err <= np.maximum(tol * (b - a) / tau_max, floor)
        done += kron[:, ok].sum(axis=1)
        err_done += err[ok].sum()
        if ok.all():
            return done, err_done
        if a.size > max_panels:
            break
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    raise QuadratureError(f"rate integral at omega={omega} did not converge", err_done + err.sum())


def gamma(omega, channel: str, bath: BathParams, rtol: float = 1e-10, atol: float = 1e-15):
    """Rate gamma_aa(w) = int_{-inf}^{inf} dt exp(i w t) C_aa(t).

    Computed as 2 Re int_0^tau_max of the correlation function with adaptive
    Gauss-Kronrod panels of half an oscillation period.  The slowly decaying
    one-phonon part of C_yy is transformed in closed form.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    omega = np.asarray(omega, dtype=float)
    flat = np.atleast_1d(omega).ravel()
    if bath.alpha == 0:
        out = np.zeros_like(flat)
    else:
        k = kappa(bath)
        tau_max = correlation_time(bath)
        idx = CHANNELS.index(channel)
        out = np.empty_like(flat)
        for i, w in enumerate(flat):
            half, _ = _half_fourier(w, bath, k, tau_max, rtol, atol)
            out[i] = 2.0 * half[idx].real
            if channel == "yy":
                out[i] += k**2 * _one_phonon_spectrum(w, bath)
    out = out.reshape(omega.shape)
    return out[()] if out.ndim == 0 else out


def gamma_pair(omega, bath: BathParams, rtol: float = 1e-10, atol: float = 1e-15):
    """(gamma_xx, gamma_yy) sharing the quadrature nodes."""
    flat = np.atleast_1d(np.asarray(omega, dtype=float))
    gxx, gyy = np.zeros_like(flat), np.zeros_like(flat)
    if bath.alpha > 0:
        k = kappa(bath)
        tau_max = correlation_time(bath)
        for i, w in enumerate(flat):
            half, _ = _half_fourier(w, bath, k, tau_max, rtol, atol)
            gxx[i] = 2.0 * half[0].real
            gyy[i] = 2.0 * half[1].real
        gyy += k**2 * _one_phonon_spectrum(flat, bath)
    return gxx, gyy


@functools.lru_cache(maxsize=32)
def dense_spectrum(bath: BathParams, n: int = 2**15):
    """Both rate spectra on a wide uniform grid, by FFT of the sampled correlation functions.

    Used for the wide-support principal-value integrals.  Returns
    (omega, gamma_xx, gamma_yy) with omega increasing.
    """
    dtau = min(0.01, 0.1 / bath.omega_c, bath.beta / 20.0)
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=dtau)
    if bath.alpha == 0:
        order = np.argsort(omega)
        zeros = np.zeros(n)
        return omega[order], zeros, zeros.copy()
    k = kappa(bath)
    tau = np.fft.fftfreq(n, d=1.0 / (n * dtau))  # 0, dtau, ..., then negative times
    cxx, cyy = _remainder_correlations(np.abs(tau), bath, k)
    neg = tau < 0
    cxx[neg], cyy[neg] = cxx[neg].conj(), cyy[neg].conj()
    cxx[n // 2] = cyy[n // 2] = 0.0  # Nyquist sample sits at the truncation edge
    gxx = (np.fft.ifft(cxx) * n * dtau).real
    gyy = (np.fft.ifft(cyy) * n * dtau).real + k**2 * _one_phonon_spectrum(omega, bath)
    order = np.argsort(omega)
    return omega[order], gxx[order], gyy[order]


_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def _panel_integral(func, lo, hi, width):
    # Composite 8-point Gauss-Legendre for each row of (lo, hi); func maps (rows, nodes) -> values.
    lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
    n = np.maximum(1, np.ceil((hi - lo) / width).astype(int))
    total = np.zeros(lo.shape)
    for n_val in np.unique(n):
        rows = np.nonzero(n == n_val)[0]
        edges = lo[rows, None] + (hi[rows] - lo[rows])[:, None] * np.linspace(0, 1, n_val + 1)[None, :]
        mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
        half = 0.5 * (edges[:, 1:] - edges[:, :-1])
        nodes = (mid[:, :, None] + half[:, :, None] * _GL8_X[None, None, :]).reshape(rows.size, -1)
        vals = func(rows, nodes).reshape(rows.size, n_val, 8)
        total[rows] = np.sum(half * (vals @ _GL8_W), axis=1)
    return total


def principal_value(func, omega, half_width, lower, upper, panel=0.25):
    """(1/2 pi) p.v. int_lower^upper dw' f(w') / (w - w') by singularity subtraction.

    On the symmetric window [w - L, w + L] the integrand (f(w') - f(w))/(w - w')
    is regular and the constant term integrates to zero; outside the window
    the kernel is regular.  ``half_width`` may be a scalar or one value per omega.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    L = np.broadcast_to(np.asarray(half_width, dtype=float), omega.shape)
    f0 = func(omega)
    win_lo = np.maximum(omega - L, lower)
    win_hi = np.minimum(omega + L, upper)
    # keep the window symmetric so the log term cancels
    L_eff = np.minimum(omega - win_lo, win_hi - omega)
    if np.any(L_eff <= 0):
        raise ValueError("omega outside the principal-value support")
    win_lo, win_hi = omega - L_eff, omega + L_eff

    def central(rows, nodes):
        w = omega[rows, None]
        return (func(nodes) - f0[rows, None]) / (w - nodes)

    def outer(rows, nodes):
        return func(nodes) / (omega[rows, None] - nodes)

    total = _panel_integral(central, win_lo, win_hi, panel)
    left = win_lo > lower
    if left.any():
        total[left] += _panel_integral(lambda r, x: outer(np.nonzero(left)[0][r], x),
                                       np.full(left.sum(), lower), win_lo[left], 4 * panel)
    right = win_hi < upper
    if right.any():
        total[right] += _panel_integral(lambda r, x: outer(np.nonzero(right)[0][r], x),
                                        win_hi[right], np.full(right.sum(), upper), 4 * panel)
    return total / (2.0 * np.pi)


def _pv_half_width(omega, bath):
    return 5.0 * np.maximum(np.abs(omega), bath.omega_c)


def _check_tail(values_at_edges, omega, edges, decay, tol):
    # exponential tail beyond each edge, integrated against 1/(w - w')
    tail = np.abs(values_at_edges[0]) * decay[0] / np.abs(omega - edges[0]) + \
        np.abs(values_at_edges[1]) * decay[1] / np.abs(omega - edges[1])
    worst = float(np.max(tail / (2 * np.pi)))
    if worst > tol:
        warnings.warn(f"spectral tail truncation contributes up to {worst:.2e} to the Lamb shift",
                      TailTruncationWarning, stacklevel=3)
    return worst


def lamb_s(omega, channel: str, bath: BathParams, tail_tol: float = 1e-8):
    """Lamb-shift integral S_aa(w) = (1/2 pi) p.v. int dw' gamma_aa(w') / (w - w')."""
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    omega = np.asarray(omega, dtype=float)
    flat = np.atleast_1d(omega)
    if bath.alpha == 0:
        out = np.zeros_like(flat)
    else:
        grid, gxx, gyy = dense_spectrum(bath)
        values = gxx if channel == "xx" else gyy
        lo, hi = grid[1], grid[-1]  # grid[0] is the Nyquist sample
        spline = CubicSpline(grid[1:], values[1:])
        _check_tail((values[1], values[-1]), flat, (lo, hi), (1.0 / bath.beta, bath.omega_c), tail_tol)
        out = principal_value(spline, flat, _pv_half_width(flat, bath), lo, hi)
    out = out.reshape(omega.shape)
    return out[()] if out.ndim == 0 else out


def weak_coupling_lamb_s(omega, bath: BathParams):
    """Principal-value partner of the weak-coupling rate 2 pi J (1 + N)."""
    omega = np.asarray(omega, dtype=float)
    flat = np.atleast_1d(omega)
    if bath.alpha == 0:
        out = np.zeros_like(flat)
    else:
        lo = -60.0 / bath.beta - 5 * bath.omega_c
        hi = 80.0 * bath.omega_c
        out = principal_value(lambda x: weak_coupling_rate(x, bath), flat,
                              _pv_half_width(flat, bath), lo, hi)
    out = out.reshape(omega.shape)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class RateTable:
    """Tabulated rates and Lamb-shift integrals on a frequency grid.

    ``kind`` is "polaron" (displacement correlations, both channels) or "weak"
    (weak-coupling rate in the xx columns, yy identically zero).  Values at
    omega = 0 are stored separately for the dephasing channel.  Interpolation
    is cubic, with separate pieces for omega < 0 and omega > 0 because the
    rates have a derivative kink at zero.
    """

    omega_grid: np.ndarray
    gamma_xx: np.ndarray
    gamma_yy: np.ndarray
    s_xx: np.ndarray
    s_yy: np.ndarray
    kappa: float
    gamma_xx_zero: float = 0.0
    gamma_yy_zero: float = 0.0
    kind: str = "polaron"
    _splines: dict = field(default=None, repr=False, compare=False)

    COLUMNS = ("gamma_xx", "gamma_yy", "s_xx", "s_yy")

    def __post_init__(self):
        grid = np.array(self.omega_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 4:
            raise ValueError("rate table needs at least 4 grid points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("rate table grid must be strictly increasing")
        object.__setattr__(self, "omega_grid", grid)
        for name in self.COLUMNS:
            col = np.array(getattr(self, name), dtype=float)
            if col.shape != grid.shape:
                raise ValueError(f"column {name} has shape {col.shape}, expected {grid.shape}")
            if not np.all(np.isfinite(col)):
                raise ValueError(f"column {name} contains non-finite values")
            col.setflags(write=False)
            object.__setattr__(self, name, col)
        grid.setflags(write=False)
        for name in ("gamma_xx", "gamma_yy"):
            worst = getattr(self, name).min()
            if worst < -1e-10:
                raise ValueError(f"{name} has negative entries (min {worst:.3e})")
        if self.kind not in ("polaron", "weak"):
            raise ValueError(f"unknown table kind {self.kind!r}")
        object.__setattr__(self, "_splines", {name: self._build_ppoly(getattr(self, name))
                                              for name in self.COLUMNS})

    def _build_ppoly(self, values):
        grid = self.omega_grid
        if grid[0] < 0 < grid[-1] and np.any(grid == 0.0):
            i0 = int(np.nonzero(grid == 0.0)[0][0])
            pieces = []
            for sl in (slice(0, i0 + 1), slice(i0, None)):
                if grid[sl].size >= 2:
                    pieces.append(CubicSpline(grid[sl], values[sl]))
            if len(pieces) == 2:
                x = np.concatenate([pieces[0].x, pieces[1].x[1:]])
                c = np.concatenate([pieces[0].c, pieces[1].c], axis=1)
                return PPoly(c, x, extrapolate=False)
        spline = CubicSpline(grid, values)
        return PPoly(spline.c, spline.x, extrapolate=False)

    @property
    def window(self):
        return float(self.omega_grid[0]), float(self.omega_grid[-1])

    def covers(self, omega) -> bool:
        lo, hi = self.window
        omega = np.asarray(omega)
        return bool(np.all((omega >= lo) & (omega <= hi)))

    def interpolate(self, column: str, omega):
        if column not in self.COLUMNS:
            raise ValueError(f"unknown column {column!r}")
        if not self.covers(omega):
            lo, hi = self.window
            raise ValueError(f"frequency outside rate table window [{lo:.4g}, {hi:.4g}]")
        out = self._splines[column](omega)
        return out[()] if np.ndim(out) == 0 else out

    def gamma(self, channel, omega):
        return self.interpolate("gamma_" + channel, omega)

    def lamb(self, channel, omega):
        return self.interpolate("s_" + channel, omega)

    def piecewise_arrays(self):
        """(breakpoints, coefficients[4 columns, 4, n-1]) for compiled evaluation."""
        first = self._splines[self.COLUMNS[0]]
        coef = np.stack([np.ascontiguousarray(self._splines[name].c) for name in self.COLUMNS])
        return np.ascontiguousarray(first.x), coef

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# kind={self.kind} kappa={self.kappa!r} gamma_xx_zero={self.gamma_xx_zero!r} "
                     f"gamma_yy_zero={self.gamma_yy_zero!r}\n")
            writer = csv.writer(fh)
            writer.writerow(("omega",) + self.COLUMNS)
            for row in zip(self.omega_grid, *(getattr(self, c) for c in self.COLUMNS)):
                writer.writerow([repr(float(v)) for v in row])
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        meta = {}
        with path.open() as fh:
            lines = fh.read().splitlines()
        if lines and lines[0].startswith("#"):
            for item in lines[0][1:].split():
                key, _, value = item.partition("=")
                meta[key] = value
            lines = lines[1:]
        reader = csv.DictReader(lines)
        missing = {"omega", *cls.COLUMNS} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"rate table CSV is missing columns {sorted(missing)}")
        rows = list(reader)
        data = {name: np.array([float(r[name]) for r in rows]) for name in ("omega",) + cls.COLUMNS}
        grid = data.pop("omega")
        kind = meta.get("kind", "polaron")
        kappa_value = float(meta.get("kappa", "nan"))
        zero_xx = float(meta["gamma_xx_zero"]) if "gamma_xx_zero" in meta else None
        zero_yy = float(meta["gamma_yy_zero"]) if "gamma_yy_zero" in meta else None
        table = cls(grid, kappa=kappa_value, kind=kind, gamma_xx_zero=0.0, gamma_yy_zero=0.0, **data)
        if zero_xx is None:
            zero_xx = float(table.gamma("xx", 0.0))
        if zero_yy is None:
            zero_yy = float(table.gamma("yy", 0.0))
        object.__setattr__(table, "gamma_xx_zero", zero_xx)
        object.__setattr__(table, "gamma_yy_zero", zero_yy)
        return table


MIN_TABLE_POINTS = 64


def rate_grid(omega_min, omega_max, n_points, dense_half_width=0.0, refine=4, pad=3):
    """Grid on the lattice k*h with h = (omega_max - omega_min)/(n_points - 1).

    Cells with |w| <= dense_half_width are subdivided ``refine`` times.  The
    lattice always contains 0 and extends ``pad`` steps beyond the requested
    window so the spline end conditions act outside it.
    """
    if n_points < MIN_TABLE_POINTS:
        raise ValueError(f"rate table needs n_points >= {MIN_TABLE_POINTS}, got {n_points}")
    if not omega_min < omega_max:
        raise ValueError("omega_min must be below omega_max")
    h = (omega_max - omega_min) / (n_points - 1)
    k_lo = math.floor(omega_min / h + 1e-9) - pad
    k_hi = math.ceil(omega_max / h - 1e-9) + pad
    fine = np.arange(k_lo * refine, k_hi * refine + 1)
    w = fine * (h / refine)
    keep = (fine % refine == 0) | (np.abs(w) <= dense_half_width + 1e-12)
    return w[keep]


def build_rate_table(bath: BathParams, omega_min, omega_max, n_points=512, kind="polaron",
                     dense_half_width=None):
    """Tabulate rates and Lamb-shift integrals for one reservoir.

    For ``kind="polaron"`` the grid is refined fourfold within |w| <= 2 kappa
    (the dense half-width can be overridden).
    """
    k = kappa(bath) if kind == "polaron" else 1.0
    if dense_half_width is None:
        dense_half_width = 2.0 * k
    grid = rate_grid(omega_min, omega_max, n_points, dense_half_width)
    if kind == "polaron":
        # Rates at w < 0 are exponentially small and the quadrature only has an
        # absolute floor there; detailed balance maps them from w > 0 exactly.
        gxx, gyy = gamma_pair(np.abs(grid), bath)
        boltzmann = np.where(grid < 0, np.exp(-bath.beta * np.abs(grid)), 1.0)
        gxx, gyy = gxx * boltzmann, gyy * boltzmann
        if bath.include_lamb_shift:
            sxx, syy = lamb_s(grid, "xx", bath), lamb_s(grid, "yy", bath)
        else:
            sxx = syy = np.zeros_like(grid)
        g0xx, g0yy = (float(v[0]) for v in gamma_pair([0.0], bath))
    elif kind == "weak":
        gxx = weak_coupling_rate(grid, bath)
        gyy = np.zeros_like(grid)
        sxx = weak_coupling_lamb_s(grid, bath) if bath.include_lamb_shift else np.zeros_like(grid)
        syy = np.zeros_like(grid)
        g0xx = g0yy = 0.0
    else:
        raise ValueError(f"unknown table kind {kind!r}")
    # clip round-off negatives at the numerical floor
    gxx = np.where((gxx < 0) & (gxx > -1e-10), 0.0, gxx)
    gyy = np.where((gyy < 0) & (gyy > -1e-10), 0.0, gyy)
    return RateTable(grid, gxx, gyy, sxx, syy, kappa=k, gamma_xx_zero=g0xx, gamma_yy_zero=g0yy,
                     kind=kind)
