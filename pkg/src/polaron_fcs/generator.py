"""Right-hand side of the tilted (counting-field) adiabatic master equation.

    dK/dt = L_t[K] + M(t, eta) K

L_t is the secular adiabatic Lindbladian (coherent part, Lamb shift and
dissipator) in either the polaron or the weak-coupling frame, and M is the work
generator from :mod:`polaron_fcs.system`.  These functions are the readable
reference implementation; the compiled integrator in ``_kernels`` evaluates the
same generator in closed form and is tested against them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bath as bath_mod
from .system import (DriveProtocol, Frame, anticommutator, commutator, dagger, eigenframe,
                     hamiltonian, jump_operators, thermal_state, work_generator)


class FrequencyWindowError(ValueError):
    """A transition frequency falls outside the rate-table window."""


@dataclass(frozen=True)
class GeneratorContext:
    frame: Frame
    protocol: DriveProtocol
    bath: bath_mod.BathParams
    table: bath_mod.RateTable
    kappa: float  # polaron renormalisation of the reservoir, whatever the frame

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame.parse(self.frame))
        expected = "polaron" if self.frame is Frame.POLARON else "weak"
        if self.table.kind != expected:
            raise ValueError(f"{self.frame.value} frame needs a '{expected}' rate table, got '{self.table.kind}'")
        w_max = max_transition_frequency(self.protocol, self.kappa_eff)
        lo, hi = self.table.window
        if lo > -w_max or hi < w_max:
            raise FrequencyWindowError(
                f"rate table window [{lo:.4g}, {hi:.4g}] does not cover +-{w_max:.4g} needed by the protocol")

    @property
    def kappa_eff(self) -> float:
        return self.kappa if self.frame is Frame.POLARON else 1.0

    @property
    def lamb_shift(self) -> bool:
        return self.bath.include_lamb_shift

    @property
    def beta(self) -> float:
        return self.bath.beta


def max_transition_frequency(protocol: DriveProtocol, kappa_eff: float) -> float:
    t_abs = max(abs(protocol.t_i), abs(protocol.t_f))
    return float(np.hypot(protocol.nu * t_abs, kappa_eff * protocol.delta))


def build_context(protocol: DriveProtocol, bath: bath_mod.BathParams, frame=Frame.POLARON,
                  table: bath_mod.RateTable | None = None, n_points: int = 512,
                  window_factor: float = 1.5) -> GeneratorContext:
    """Context with a freshly built rate table covering +-window_factor * max omega(t)."""
    frame = Frame.parse(frame)
    k = bath_mod.kappa(bath)
    if table is None:
        k_eff = k if frame is Frame.POLARON else 1.0
        w = window_factor * max_transition_frequency(protocol, k_eff)
        table = bath_mod.build_rate_table(bath, -w, w, n_points, kind=frame.value,
                                          dense_half_width=2.0 * k_eff * protocol.delta)
    return GeneratorContext(frame, protocol, bath, table, k)


def _rate(ctx, label, freq):
    channel = "xx" if label in ("x", "z") else "yy"
    if freq == 0.0:
        return ctx.table.gamma_xx_zero if channel == "xx" else ctx.table.gamma_yy_zero
    if not ctx.table.covers(freq):
        raise FrequencyWindowError(f"transition frequency {freq:.6g} outside rate table window")
    return float(ctx.table.gamma(channel, freq))


def _lamb(ctx, label, freq):
    channel = "xx" if label in ("x", "z") else "yy"
    return float(ctx.table.lamb(channel, freq))


def lamb_shift_hamiltonian(t, ctx: GeneratorContext):
    """H_LS = sum_{a,n} S_aa(w_n) A_{a,n}^dag A_{a,n}."""
    eig = eigenframe(t, ctx.protocol, ctx.frame, ctx.kappa)
    h = np.zeros((2, 2), dtype=complex)
    if not ctx.lamb_shift:
        return h
    for op in jump_operators(t, ctx.frame, eig, ctx.protocol.delta):
        h += _lamb(ctx, op.label, op.frequency) * (dagger(op.matrix) @ op.matrix)
    return h


def lindbladian_apply(t, x, ctx: GeneratorContext, y_sign: float = 1.0):
    """L_t[X] = -i[H + H_LS, X] + sum gamma (A X A^dag - 1/2 {A^dag A, X})."""
    x = np.asarray(x, dtype=complex)
    eig = eigenframe(t, ctx.protocol, ctx.frame, ctx.kappa)
    h = hamiltonian(t, ctx.protocol, ctx.frame, ctx.kappa) + lamb_shift_hamiltonian(t, ctx)
    out = -1j * commutator(h, x)
    for op in jump_operators(t, ctx.frame, eig, ctx.protocol.delta, y_sign=y_sign):
        rate = _rate(ctx, op.label, op.frequency)
        if rate == 0.0:
            continue
        a = op.matrix
        ad = dagger(a)
        out += rate * (a @ x @ ad - 0.5 * anticommutator(ad @ a, x))
    return out


def jump_rates(t, ctx: GeneratorContext):
    """All rates gamma_{a,n}(t) along the protocol, keyed by (label, index)."""
    eig = eigenframe(t, ctx.protocol, ctx.frame, ctx.kappa)
    return {(op.label, op.index): _rate(ctx, op.label, op.frequency)
            for op in jump_operators(t, ctx.frame, eig, ctx.protocol.delta)}


def rhs(t, k, eta, ctx: GeneratorContext):
    """L_t[K] + M(t, eta) K."""
    k = np.asarray(k, dtype=complex)
    out = lindbladian_apply(t, k, ctx)
    if eta != 0:
        out = out + work_generator(t, eta, ctx.protocol, ctx.frame, ctx.kappa) @ k
    return out


def equilibrium_state(t, ctx: GeneratorContext):
    """Instantaneous Gibbs state of the frame's system Hamiltonian."""
    return thermal_state(t, ctx.protocol, ctx.frame, ctx.kappa, ctx.beta)
