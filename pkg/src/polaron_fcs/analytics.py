"""Closed-system Landau-Zener references: exact unitary sweeps and asymptotic formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .system import DriveProtocol, Frame, eigenframe, hamiltonian

SCHRODINGER_RTOL = 1e-11
SCHRODINGER_ATOL = 1e-13


def _schrodinger(protocol, kappa_eff, psi0, t_eval):
    def f(t, psi):
        return -1j * (hamiltonian(t, protocol, Frame.POLARON, kappa_eff) @ psi)

    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(f, (t_eval[0], t_eval[-1]), np.asarray(psi0, dtype=complex), method="DOP853",
                    t_eval=t_eval, rtol=SCHRODINGER_RTOL, atol=SCHRODINGER_ATOL)
    if not sol.success:
        raise RuntimeError(f"Schrodinger integration failed: {sol.message}")
    return sol.y.T


@dataclass(frozen=True)
class ClosedLZResult:
    transition_probability: float  # |<e_-+(t_f)|U|e_+-(t_i)>|^2, averaged over both starts
    transition_from_ground: float
    transition_from_excited: float
    p_ground: float
    delta_e: float  # (w0(t_f) - w0(t_i)) / 2
    peak_work: tuple  # exact (W_minus, 0-peak, W_plus) from the adiabatic energies
    peak_mass: tuple
    norm_error: float

    @property
    def masses_by_label(self):
        return dict(zip(("-dE", "0", "+dE"), self.peak_mass))


def ground_occupation(omega, beta):
    """Thermal ground-state population 1/(1 + exp(-beta omega)) of a two-level system."""
    if math.isinf(beta):
        return 1.0
    return 0.5 * (1.0 + math.tanh(0.5 * beta * omega))


def closed_lz_unitary(protocol: DriveProtocol, kappa_eff: float = 1.0, beta: float = math.inf) -> ClosedLZResult:
    """Exact closed sweep from each initial adiabatic eigenstate.

    Two-point-measurement work takes the values E_b(t_f) - E_a(t_i); with
    thermal initial weights this gives three peaks near -dE, 0 and +dE.
    """
    ei = eigenframe(protocol.t_i, protocol, Frame.POLARON, kappa_eff)
    ef = eigenframe(protocol.t_f, protocol, Frame.POLARON, kappa_eff)
    vi, vf = ei.eigenvectors(), ef.eigenvectors()
    ts = [protocol.t_i, protocol.t_f]
    psi_from_plus = _schrodinger(protocol, kappa_eff, vi[:, 0], ts)[-1]
    psi_from_minus = _schrodinger(protocol, kappa_eff, vi[:, 1], ts)[-1]
    p_minus_to_plus = abs(np.vdot(vf[:, 0], psi_from_minus)) ** 2
    p_plus_to_minus = abs(np.vdot(vf[:, 1], psi_from_plus)) ** 2
    norm_error = max(abs(np.linalg.norm(psi_from_plus) - 1), abs(np.linalg.norm(psi_from_minus) - 1))

    p_g = ground_occupation(ei.omega, beta)
    w_i, w_f = ei.omega, ef.omega
    adiabatic_mass = p_g * (1 - p_minus_to_plus) + (1 - p_g) * (1 - p_plus_to_minus)
    masses = ((1 - p_g) * p_plus_to_minus, adiabatic_mass, p_g * p_minus_to_plus)
    work = (-(w_f + w_i) / 2, (w_i - w_f) / 2, (w_f + w_i) / 2)
    return ClosedLZResult(
        transition_probability=0.5 * (p_minus_to_plus + p_plus_to_minus),
        transition_from_ground=float(p_minus_to_plus),
        transition_from_excited=float(p_plus_to_minus),
        p_ground=p_g,
        delta_e=protocol.energy_change,
        peak_work=tuple(float(v) for v in work),
        peak_mass=tuple(float(v) for v in masses),
        norm_error=float(norm_error),
    )


def closed_density_trajectory(protocol: DriveProtocol, kappa_eff, rho0, times):
    """rho(t) = U rho0 U^dag on ``times`` by propagating the eigenvectors of rho0."""
    rho0 = np.asarray(rho0, dtype=complex)
    vals, vecs = np.linalg.eigh(rho0)
    states = np.zeros((len(times), 2, 2), dtype=complex)
    for p, v in zip(vals, vecs.T):
        if abs(p) < 1e-15:
            continue
        psi = _schrodinger(protocol, kappa_eff, v, times)
        states += p * np.einsum("ni,nj->nij", psi, psi.conj())
    return states


@dataclass(frozen=True)
class LZAsymptotic:
    printed_form: float  # 1 - exp(-pi Delta^2 k^2 / (2 nu)), as the expression is usually quoted
    complement: float  # exp(-pi Delta^2 k^2 / (2 nu)), the diabatic-passage (nonadiabatic) probability


def lz_asymptotic(protocol: DriveProtocol, kappa_eff: float = 1.0) -> LZAsymptotic:
    gap2 = (protocol.delta * kappa_eff) ** 2
    if protocol.nu == 0:
        complement = 0.0
    else:
        complement = math.exp(-math.pi * gap2 / (2.0 * protocol.nu))
    return LZAsymptotic(printed_form=1.0 - complement, complement=complement)
