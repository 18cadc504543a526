"""Work distributions, moments and the Jarzynski check from characteristic functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evolve import CFGrid, SolverOptions, integrate_wco, read_sidecar, sample_cf_at, write_sidecar
from .generator import GeneratorContext
from .system import free_energy_ps

WINDOWS = ("rectangular", "hann", "bartlett")
ALIAS_FRACTION = 0.9
SUBDIVISIONS = 8  # density samples per bin


def window_weights(eta, eta_max, kind="rectangular"):
    x = np.asarray(eta, dtype=float) / eta_max
    if kind == "rectangular":
        return np.ones_like(x)
    if kind == "hann":
        return 0.5 * (1.0 + np.cos(np.pi * x))
    if kind == "bartlett":
        return 1.0 - np.abs(x)
    raise ValueError(f"unknown window {kind!r}; choose from {WINDOWS}")


def alias_bound(delta_eta):
    return ALIAS_FRACTION * math.pi / delta_eta


def invert_cf(grid: CFGrid, w, window="rectangular", chunk=2048):
    """p(W) = (1/pi) Re sum'_k exp(-i eta_k W) Phi(eta_k) d_eta at the requested W values.

    Trapezoid weights (half at both ends) over eta in [0, eta_max]; the negative
    half follows from Phi(-eta) = conj(Phi(eta)).
    """
    w = np.asarray(w, dtype=float)
    bound = alias_bound(grid.delta_eta)
    if np.any(np.abs(w) > bound * (1 + 1e-12)):
        raise ValueError(f"W range exceeds the aliasing bound |W| < {bound:.4g} for d_eta = {grid.delta_eta}")
    weights = np.full(grid.eta.size, grid.delta_eta)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    coef = weights * window_weights(grid.eta, grid.eta[-1], window) * grid.phi
    flat = w.ravel()
    out = np.empty(flat.size)
    for s in range(0, flat.size, chunk):
        ww = flat[s:s + chunk]
        out[s:s + chunk] = (np.exp(-1j * np.outer(ww, grid.eta)) @ coef).real / np.pi
    return out.reshape(w.shape)


@dataclass
class WorkDistribution:
    edges: np.ndarray
    probabilities: np.ndarray
    density_w: np.ndarray
    density: np.ndarray
    window: str = "rectangular"
    metadata: dict = field(default_factory=dict)

    @property
    def delta_w(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    @property
    def normalization_deficit(self) -> float:
        return abs(1.0 - self.total)

    @property
    def negativity(self) -> float:
        """Total negative bin mass sum |min(P, 0)|."""
        return float(-np.minimum(self.probabilities, 0.0).sum())

    @property
    def density_negativity_ratio(self) -> float:
        """Deepest negative density value relative to the peak density."""
        return float(max(0.0, -self.density.min()) / self.density.max())

    @property
    def bin_negativity_ratio(self) -> float:
        """Most negative bin probability relative to the largest bin."""
        return float(max(0.0, -self.probabilities.min()) / self.probabilities.max())

    def mass(self, w_lo, w_hi):
        """Probability in bins whose centres lie in [w_lo, w_hi]."""
        c = self.centers
        return float(self.probabilities[(c >= w_lo) & (c <= w_hi)].sum())

    def local_maxima(self, min_prob=0.0):
        p = self.probabilities
        idx = np.nonzero((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:]) & (p[1:-1] > min_prob))[0] + 1
        return self.centers[idx], p[idx]

    def mean(self):
        return float(np.sum(self.centers * self.probabilities))

    def variance(self):
        m = self.mean()
        return float(np.sum(self.centers**2 * self.probabilities) - m * m)

    def to_csv(self, path):
        path = Path(path)
        np.savetxt(path, np.column_stack([self.centers, self.probabilities]), delimiter=",",
                   header="w_center,probability", comments="", fmt="%.17g")
        meta = dict(self.metadata)
        meta.update({"window": self.window, "delta_w": self.delta_w, "total": self.total,
                     "negativity": self.negativity, "density_negativity_ratio": self.density_negativity_ratio})
        write_sidecar(path, meta)
        return path

    def write_density(self, path):
        """Gnuplot-friendly whitespace-separated (W, p(W)) file."""
        path = Path(path)
        np.savetxt(path, np.column_stack([self.density_w, self.density]), header="W p(W)", fmt="%.12g")
        return path

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = read_sidecar(path)
        dw = float(meta.get("delta_w", data[1, 0] - data[0, 0]))
        edges = np.append(data[:, 0] - 0.5 * dw, data[-1, 0] + 0.5 * dw)
        return cls(edges, data[:, 1], np.empty(0), np.empty(0), meta.get("window", "rectangular"), meta)


def bin_distribution(density_w, density, delta_w, window="rectangular", metadata=None):
    """Integrate a density sampled on an aligned grid over consecutive bins of width delta_w.

    ``density_w`` must be uniform with ``SUBDIVISIONS`` intervals per bin and
    start on a bin edge; bins use the composite trapezoid rule.
    """
    density_w = np.asarray(density_w, dtype=float)
    density = np.asarray(density, dtype=float)
    n_int = density_w.size - 1
    if n_int % SUBDIVISIONS:
        raise ValueError("density grid must have a multiple of SUBDIVISIONS intervals")
    n_bins = n_int // SUBDIVISIONS
    if not math.isclose(density_w[-1] - density_w[0], n_bins * delta_w, rel_tol=1e-9):
        raise ValueError("density grid does not match the bin width")
    h = delta_w / SUBDIVISIONS
    seg = 0.5 * h * (density[:-1] + density[1:])
    probs = seg.reshape(n_bins, SUBDIVISIONS).sum(axis=1)
    edges = density_w[0] + delta_w * np.arange(n_bins + 1)
    return WorkDistribution(edges, probs, density_w, density, window, dict(metadata or {}))


def work_distribution(grid: CFGrid, delta_w, w_range=None, window="rectangular"):
    """Invert and bin: bins are centred on integer multiples of delta_w.

    ``w_range`` defaults to the alias-free window |W| < 0.9 pi / d_eta.
    """
    bound = alias_bound(grid.delta_eta)
    lo, hi = (-bound, bound) if w_range is None else w_range
    if lo < -bound * (1 + 1e-12) or hi > bound * (1 + 1e-12):
        raise ValueError(f"W range [{lo}, {hi}] exceeds the aliasing bound {bound:.4g}")
    k_lo = math.ceil(lo / delta_w + 0.5)
    k_hi = math.floor(hi / delta_w - 0.5)
    if k_hi < k_lo:
        raise ValueError("W range narrower than one bin")
    first_edge = (k_lo - 0.5) * delta_w
    n_bins = k_hi - k_lo + 1
    w = first_edge + (delta_w / SUBDIVISIONS) * np.arange(n_bins * SUBDIVISIONS + 1)
    density = invert_cf(grid, w, window)
    meta = dict(grid.metadata)
    meta.update({"delta_w": delta_w, "window": window})
    return bin_distribution(w, density, delta_w, window, meta)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def moments_from_samples(phi0, phi_h, phi_2h, h):
    """Five-point central differences of Phi at 0 using Phi(-eta) = conj(Phi(eta))."""
    mean = (16.0 * phi_h.imag - 2.0 * phi_2h.imag) / (12.0 * h)
    second = -(-2.0 * phi_2h.real + 32.0 * phi_h.real - 30.0 * phi0.real) / (12.0 * h * h)
    return Moments(float(mean), float(second - mean * mean))


def moments_from_cf(grid: CFGrid, max_spacing=0.01):
    if grid.eta.size < 3:
        raise ValueError("need at least three eta samples")
    h = grid.delta_eta
    if h > max_spacing * (1 + 1e-12):
        raise ValueError(f"eta spacing {h} too coarse for derivatives at 0 (need <= {max_spacing})")
    return moments_from_samples(grid.phi[0], grid.phi[1], grid.phi[2], h)


def cf_moments(ctx: GeneratorContext, opts: SolverOptions = SolverOptions(), h=0.01):
    """Mean and variance of W from three solves at eta = 0, h, 2h."""
    phi = sample_cf_at([0.0, h, 2.0 * h], ctx, opts)
    return moments_from_samples(phi[0], phi[1], phi[2], h)


def moments(source, **kwargs):
    """Mean and variance from a CFGrid (finite differences) or a WorkDistribution (bin sums)."""
    if isinstance(source, CFGrid):
        return moments_from_cf(source, **kwargs)
    if isinstance(source, WorkDistribution):
        return Moments(source.mean(), source.variance())
    raise TypeError("moments expects a CFGrid or a WorkDistribution")


@dataclass(frozen=True)
class MomentComparison:
    cf: Moments
    dist: Moments
    mean_difference: float  # cf - dist
    variance_difference: float
    relative_mean_difference: float  # |cf - dist| / max(|cf mean|, 1/beta)


def compare_moments(cf: Moments, dist, beta=1.0) -> MomentComparison:
    """Cross-check the characteristic-function moments against a binned distribution."""
    d = dist if isinstance(dist, Moments) else moments(dist)
    scale = max(abs(cf.mean), 1.0 / beta if beta > 0 else 0.0)
    diff = cf.mean - d.mean
    return MomentComparison(cf, d, diff, cf.variance - d.variance, abs(diff) / scale if scale > 0 else abs(diff))


@dataclass(frozen=True)
class JarzynskiResult:
    lhs: complex
    rhs: float
    deviation: float


def jarzynski_check(ctx: GeneratorContext, opts: SolverOptions = SolverOptions()):
    """<exp(-beta W)> from one solve at eta = i beta, against exp(-beta dF)."""
    beta = ctx.beta
    k = integrate_wco(1j * beta, ctx, opts)
    lhs = complex(np.trace(k))
    p = ctx.protocol
    d_f = free_energy_ps(p.t_f, p, ctx.kappa_eff, beta) - free_energy_ps(p.t_i, p, ctx.kappa_eff, beta)
    rhs = math.exp(-beta * d_f)
    return JarzynskiResult(lhs, rhs, abs(lhs - rhs))
