"""Time integration of the work characteristic operator and characteristic-function sampling."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from . import __version__
from . import _kernels as kern
from .generator import GeneratorContext, equilibrium_state, rhs
from .system import Frame, SIGMA_Z, validity_report

log = logging.getLogger(__name__)

CHUNK_SIZE = 32  # eta values per task; fixed so the work split never depends on the thread count


class SolverError(RuntimeError):
    """Integration failed (step underflow, non-finite state, table window)."""


@dataclass(frozen=True)
class SolverOptions:
    method: str = "rk45"  # "rk45" (adaptive Dormand-Prince) or "rk4" (fixed step)
    h0: float = 0.01
    rtol: float = 1e-8
    max_step: float = 0.1
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"method must be 'rk45' or 'rk4', got {self.method!r}")
        if not self.h0 > 0:
            raise ValueError("h0 must be > 0")
        if not 1e-12 < self.rtol < 1e-2:
            raise ValueError(f"rtol must lie in (1e-12, 1e-2), got {self.rtol}")
        if not self.max_step > 0:
            raise ValueError("max_step must be > 0")

    @property
    def method_code(self):
        return kern.METHOD_RK45 if self.method == "rk45" else kern.METHOD_RK4


_STATUS_TEXT = {
    kern.STATUS_UNDERFLOW: "step size underflow",
    kern.STATUS_NONFINITE: "non-finite state",
    kern.STATUS_MAXSTEPS: "maximum number of steps exceeded",
    kern.STATUS_WINDOW: "transition frequency outside rate table window",
}


def _kernel_args(ctx: GeneratorContext):
    x, coef = ctx.table.piecewise_arrays()
    mode = kern.MODE_POLARON if ctx.frame is Frame.POLARON else kern.MODE_WEAK
    return (ctx.protocol.nu, ctx.protocol.delta, ctx.kappa_eff, mode, bool(ctx.lamb_shift),
            float(ctx.table.gamma_xx_zero), x, coef)


def kernel_rhs(t, k, eta, ctx: GeneratorContext):
    """Compiled right-hand side as a 2x2 matrix (for cross-checks against ``generator.rhs``)."""
    y = np.ascontiguousarray(np.asarray(k, dtype=complex).ravel())
    out = np.empty(4, dtype=complex)
    if not kern.rhs_eval(float(t), y, out, complex(eta), *_kernel_args(ctx)):
        raise SolverError(f"transition frequency at t={t} outside rate table window")
    return out.reshape(2, 2)


def _run(y, t0, t1, eta, ctx, opts):
    status, t_reached, n = kern.integrate(y, float(t0), float(t1), complex(eta), *_kernel_args(ctx),
                                          opts.method_code, opts.h0, opts.rtol, opts.max_step,
                                          opts.max_steps)
    if status != kern.STATUS_OK:
        raise SolverError(f"{_STATUS_TEXT[status]} at t={t_reached:.6g}, eta={complex(eta)}")
    return n


def integrate_wco(eta, ctx: GeneratorContext, opts: SolverOptions = SolverOptions(), k0=None):
    """K(t_f, eta) starting from the instantaneous Gibbs state at t_i (or ``k0``)."""
    k = equilibrium_state(ctx.protocol.t_i, ctx) if k0 is None else np.asarray(k0, dtype=complex)
    y = np.ascontiguousarray(k.ravel().copy())
    _run(y, ctx.protocol.t_i, ctx.protocol.t_f, eta, ctx, opts)
    return y.reshape(2, 2)


def integrate_wco_reference(eta, ctx: GeneratorContext, t_span=None, rtol=1e-10, atol=1e-12):
    """Slow reference integration of ``generator.rhs`` with scipy's DOP853."""
    t0, t1 = t_span if t_span is not None else (ctx.protocol.t_i, ctx.protocol.t_f)
    k0 = equilibrium_state(t0, ctx)

    def f(t, y):
        return rhs(t, y.reshape(2, 2), eta, ctx).ravel()

    cap = 0.1 / (1.0 + abs(eta) * ctx.protocol.nu)
    sol = solve_ivp(f, (t0, t1), k0.ravel(), method="DOP853", rtol=rtol, atol=atol, max_step=cap)
    if not sol.success:
        raise SolverError(sol.message)
    return sol.y[:, -1].reshape(2, 2)


@dataclass
class CFGrid:
    """Characteristic function samples Phi(eta) on eta = 0, d_eta, ..., eta_max."""

    eta: np.ndarray
    phi: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=complex)
        if self.eta.shape != self.phi.shape or self.eta.ndim != 1:
            raise ValueError("eta and phi must be 1-d arrays of equal length")
        if self.eta.size == 0 or self.eta[0] != 0.0:
            raise ValueError("grid must start at eta = 0")
        if np.any(np.diff(self.eta) <= 0):
            raise ValueError("eta must be strictly increasing")

    @property
    def delta_eta(self) -> float:
        return float(self.eta[1] - self.eta[0]) if self.eta.size > 1 else math.nan

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.phi)))

    def symmetric(self):
        """(eta, phi) over [-eta_max, eta_max] using Phi(-eta) = conj(Phi(eta))."""
        eta = np.concatenate([-self.eta[:0:-1], self.eta])
        phi = np.concatenate([self.phi[:0:-1].conj(), self.phi])
        return eta, phi

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("eta", "re_phi", "im_phi"))
            for e, p in zip(self.eta, self.phi):
                writer.writerow((repr(float(e)), repr(float(p.real)), repr(float(p.imag))))
        write_sidecar(path, self.metadata)
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = read_sidecar(path)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2], meta)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_sidecar(path, metadata):
    meta = dict(metadata)
    meta.setdefault("version", __version__)
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def read_sidecar(path):
    side = sidecar_path(path)
    return json.loads(side.read_text()) if side.exists() else {}


def context_metadata(ctx: GeneratorContext, opts: SolverOptions):
    return {
        "frame": ctx.frame.value,
        "protocol": asdict(ctx.protocol),
        "bath": asdict(ctx.bath),
        "kappa": ctx.kappa,
        "solver": asdict(opts),
        "rate_table_points": int(ctx.table.omega_grid.size),
        "version": __version__,
    }


def eta_grid(eta_max, delta_eta):
    if not eta_max > 0 or not delta_eta > 0:
        raise ValueError("eta_max and delta_eta must be > 0")
    n = int(round(eta_max / delta_eta))
    if abs(n * delta_eta - eta_max) > 1e-9 * eta_max:
        raise ValueError("eta_max must be an integer multiple of delta_eta")
    return delta_eta * np.arange(n + 1)


def sample_cf_at(etas, ctx: GeneratorContext, opts: SolverOptions = SolverOptions(), threads: int = 1):
    """Phi(eta) = tr K(t_f, eta) for arbitrary real or complex etas.

    Work is split into fixed chunks of ``CHUNK_SIZE`` and each eta is integrated
    independently, so the output is bitwise identical for any thread count.
    """
    etas = np.ascontiguousarray(np.asarray(etas, dtype=complex))
    n = etas.size
    phi = np.empty(n, dtype=complex)
    status = np.zeros(n, dtype=np.int64)
    t_fail = np.zeros(n)
    y_init = np.ascontiguousarray(equilibrium_state(ctx.protocol.t_i, ctx).ravel())
    args = _kernel_args(ctx)

    def work(start):
        stop = min(start + CHUNK_SIZE, n)
        kern.sample_chunk(etas[start:stop], y_init, float(ctx.protocol.t_i), float(ctx.protocol.t_f),
                          *args, opts.method_code, opts.h0, opts.rtol, opts.max_step, opts.max_steps,
                          phi[start:stop], status[start:stop], t_fail[start:stop])

    starts = range(0, n, CHUNK_SIZE)
    if threads <= 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    bad = np.nonzero(status != kern.STATUS_OK)[0]
    if bad.size:
        details = "; ".join(f"eta[{i}]={etas[i]}: {_STATUS_TEXT[int(status[i])]} at t={t_fail[i]:.6g}"
                            for i in bad[:10])
        raise SolverError(f"{bad.size} counting-field solves failed ({details})")
    return phi


def sample_cf(eta_max, delta_eta, ctx: GeneratorContext, opts: SolverOptions = SolverOptions(),
              threads: int = 1) -> CFGrid:
    """Characteristic function on eta = 0, delta_eta, ..., eta_max."""
    report = validity_report(ctx.protocol, ctx.bath, ctx.kappa)
    for name, check in report["checks"].items():
        if check["flag"] != "pass":
            log.warning("validity check %s = %.3g (%s)", name, check["value"], check["flag"])
    etas = eta_grid(eta_max, delta_eta)
    phi = sample_cf_at(etas, ctx, opts, threads)
    meta = context_metadata(ctx, opts)
    meta.update({"eta_max": eta_max, "delta_eta": delta_eta, "max_abs_phi": float(np.max(np.abs(phi)))})
    if meta["max_abs_phi"] > 1 + 1e-6:
        log.warning("|Phi| exceeds 1 by %.3g", meta["max_abs_phi"] - 1)
    return CFGrid(etas, phi, meta)


@dataclass
class DensityTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 2, 2)

    @property
    def sigma_z(self):
        return np.einsum("ij,nji->n", SIGMA_Z, self.states).real


def evolve_density(ctx: GeneratorContext, opts: SolverOptions, rho0, times,
                   positivity_tol: float = 1e-8) -> DensityTrajectory:
    """eta = 0 evolution of ``rho0`` from times[0], storing the state at each requested time."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a strictly increasing 1-d array")
    rho0 = np.asarray(rho0, dtype=complex)
    if not np.allclose(rho0, rho0.conj().T, atol=1e-12) or abs(np.trace(rho0) - 1) > 1e-10:
        raise ValueError("rho0 must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho0).min() < -positivity_tol:
        raise ValueError("rho0 must be positive semidefinite")
    y = np.ascontiguousarray(rho0.ravel().copy())
    states = np.empty((times.size, 2, 2), dtype=complex)
    states[0] = rho0
    for i in range(1, times.size):
        _run(y, times[i - 1], times[i], 0.0, ctx, opts)
        rho = y.reshape(2, 2)
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lowest < -positivity_tol:
            raise SolverError(f"density matrix lost positivity (eigenvalue {lowest:.3e}) at t={times[i]:.6g}")
        states[i] = rho
    return DensityTrajectory(times, states)
