"""Two-level system geometry for the linearly driven tunnelling model.

The system Hamiltonian is H(t) = 0.5 * w0(t) sigma_z + 0.5 * k Delta sigma_x with
w0(t) = nu t, where k = kappa in the polaron frame and k = 1 in the bare
(weak-coupling) frame.  Matrices are plain 2x2 complex numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def dagger(a):
    return a.conj().T


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


class Frame(enum.Enum):
    POLARON = "polaron"
    WEAK = "weak"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"pme": "polaron", "polaron": "polaron", "weak": "weak", "wcme": "weak",
                   "weakcoupling": "weak", "weak_coupling": "weak", "weak-coupling": "weak"}
        if key not in aliases:
            raise ValueError(f"unknown frame {value!r}; expected 'polaron' or 'weak'")
        return cls(aliases[key])


@dataclass(frozen=True)
class DriveProtocol:
    """Linear sweep w0(t) = nu * t over [t_i, t_f] with tunnelling Delta.

    nu = 0 (static Hamiltonian) is accepted for fixed-point checks.
    """

    nu: float
    t_i: float
    t_f: float
    delta: float = 1.0

    def __post_init__(self):
        if not self.t_i < self.t_f:
            raise ValueError(f"need t_i < t_f, got t_i={self.t_i}, t_f={self.t_f}")
        if not self.nu >= 0:
            raise ValueError(f"sweep rate nu must be >= 0, got {self.nu}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")

    def omega0(self, t):
        return self.nu * t

    @property
    def energy_change(self) -> float:
        """Bare diabatic energy change (w0(t_f) - w0(t_i)) / 2."""
        return 0.5 * (self.omega0(self.t_f) - self.omega0(self.t_i))


def effective_kappa(frame, kappa) -> float:
    return float(kappa) if Frame.parse(frame) is Frame.POLARON else 1.0


@dataclass(frozen=True)
class EigenFrame:
    theta: float
    omega: float
    dtheta_dt: float
    domega_dt: float

    @property
    def half_angles(self):
        """(cos(theta/2), sin(theta/2)) without cancellation near theta = 0 or pi."""
        cos_t = math.cos(self.theta)
        sin_t = math.sin(self.theta)
        if cos_t >= 0:
            c = math.sqrt(0.5 * (1.0 + cos_t))
            s = sin_t / (2.0 * c)
        else:
            s = math.sqrt(0.5 * (1.0 - cos_t))
            c = sin_t / (2.0 * s)
        return c, s

    def eigenvectors(self):
        """Columns |e+>, |e->."""
        c, s = self.half_angles
        return np.array([[c, -s], [s, c]], dtype=complex)

    def to_computational(self, m_eig):
        """Map a matrix written in the (|e+>, |e->) basis to the computational basis."""
        v = self.eigenvectors()
        return v @ m_eig @ dagger(v)

    def to_eigenbasis(self, m):
        v = self.eigenvectors()
        return dagger(v) @ m @ v


def eigenframe(t, protocol: DriveProtocol, frame=Frame.POLARON, kappa=1.0) -> EigenFrame:
    k_eff = effective_kappa(frame, kappa)
    w0 = protocol.omega0(t)
    gap = k_eff * protocol.delta
    omega = math.hypot(w0, gap)
    theta = math.atan2(gap, w0)
    dtheta = -gap * protocol.nu / omega**2
    domega = protocol.nu**2 * t / omega
    return EigenFrame(theta, omega, dtheta, domega)


def hamiltonian(t, protocol: DriveProtocol, frame=Frame.POLARON, kappa=1.0):
    k_eff = effective_kappa(frame, kappa)
    return 0.5 * protocol.omega0(t) * SIGMA_Z + 0.5 * k_eff * protocol.delta * SIGMA_X


@dataclass(frozen=True)
class JumpOperator:
    label: str  # "x", "y" (polaron) or "z" (weak coupling)
    index: str  # "+", "-", "0"
    matrix: np.ndarray
    frequency: float  # transition frequency; rate is gamma(frequency)


def jump_operators(t, frame, eig: EigenFrame, delta=1.0, y_sign=1.0):
    """Eigenoperators of the system-bath coupling in the computational basis.

    Polaron frame: A_{x,+-} = (Delta/2) cos(theta) |e+-><e-+|,
    A_{x,0} = (Delta/2) sin(theta) (|e+><e+| - |e-><e-|),
    A_{y,+} = -(i Delta/2) |e+><e-| and A_{y,-} its adjoint.
    Weak-coupling frame: A_+ = sin(theta) |e+><e-| and A_- its adjoint.
    ``y_sign`` flips the phase convention of A_y; only |A|^2 enters the dissipator.
    Rates are gamma_aa evaluated at ``frequency`` (-omega for +, +omega for -, 0).
    """
    frame = Frame.parse(frame)
    cos_t, sin_t = math.cos(eig.theta), math.sin(eig.theta)
    raise_eig = np.array([[0, 1], [0, 0]], dtype=complex)
    z_eig = np.array([[1, 0], [0, -1]], dtype=complex)
    up = eig.to_computational(raise_eig)
    out = []
    if frame is Frame.POLARON:
        a_xp = 0.5 * delta * cos_t * up
        out.append(JumpOperator("x", "+", a_xp, -eig.omega))
        out.append(JumpOperator("x", "-", dagger(a_xp), eig.omega))
        out.append(JumpOperator("x", "0", 0.5 * delta * sin_t * eig.to_computational(z_eig), 0.0))
        a_yp = -y_sign * 0.5j * delta * up
        out.append(JumpOperator("y", "+", a_yp, -eig.omega))
        out.append(JumpOperator("y", "-", dagger(a_yp), eig.omega))
    else:
        a_p = sin_t * up
        out.append(JumpOperator("z", "+", a_p, -eig.omega))
        out.append(JumpOperator("z", "-", dagger(a_p), eig.omega))
    return out


def work_generator(t, eta, protocol: DriveProtocol, frame=Frame.POLARON, kappa=1.0):
    """M(t, eta) = [d/dt exp(i eta H(t))] exp(-i eta H(t)) in closed form.

    In the instantaneous eigenbasis, with sigma_+ = |e+><e-|,
    M = (i eta omega'/2) Z + (theta'/2) [(exp(i eta omega) - 1) sigma_+ + (1 - exp(-i eta omega)) sigma_-].
    ``eta`` may be complex.
    """
    eig = eigenframe(t, protocol, frame, kappa)
    eta = complex(eta)
    m = np.empty((2, 2), dtype=complex)
    m[0, 0] = 0.5j * eta * eig.domega_dt
    m[1, 1] = -m[0, 0]
    m[0, 1] = 0.5 * eig.dtheta_dt * np.expm1(1j * eta * eig.omega)
    m[1, 0] = -0.5 * eig.dtheta_dt * np.expm1(-1j * eta * eig.omega)
    return eig.to_computational(m)


def propagator_exp(t, eta, protocol, frame=Frame.POLARON, kappa=1.0):
    """exp(i eta H(t)) via the eigen-decomposition (eta may be complex)."""
    eig = eigenframe(t, protocol, frame, kappa)
    phase = np.diag([np.exp(0.5j * eta * eig.omega), np.exp(-0.5j * eta * eig.omega)])
    return eig.to_computational(phase)


def thermal_state(t, protocol, frame=Frame.POLARON, kappa=1.0, beta=1.0):
    """Gibbs state exp(-beta H)/Z; beta = inf gives the ground-state projector."""
    eig = eigenframe(t, protocol, frame, kappa)
    if math.isinf(beta):
        p_up = 0.0
    else:
        # excited population 1/(1 + exp(beta omega)), overflow-safe
        p_up = 0.5 * (1.0 - math.tanh(0.5 * beta * eig.omega))
    return eig.to_computational(np.diag([p_up, 1.0 - p_up]).astype(complex))


def free_energy_ps(t, protocol: DriveProtocol, kappa, beta):
    """-(1/beta) ln(2 cosh(beta omega / 2)) with omega the polaron splitting."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    omega = math.hypot(protocol.omega0(t), kappa * protocol.delta)
    x = beta * omega
    # ln(2 cosh(x/2)) = x/2 + log1p(exp(-x))
    return -(0.5 * x + math.log1p(math.exp(-x))) / beta


def coupling_strength(kappa, delta=1.0):
    """Perturbation parameter g = (Delta/2) sqrt((1 + kappa^4)/2)."""
    return 0.5 * delta * math.sqrt(0.5 * (1.0 + kappa**4))


PASS_THRESHOLD = 0.1
WARN_THRESHOLD = 0.5


def _flag(value):
    if value <= PASS_THRESHOLD:
        return "pass"
    if value <= WARN_THRESHOLD:
        return "warn"
    return "fail"


def validity_report(protocol: DriveProtocol, bath, kappa):
    """Small-parameter diagnostics of the polaron adiabatic master equation.

    Returns a dict with g and, for each ratio, its value and a pass/warn/fail flag.
    """
    g = coupling_strength(kappa, protocol.delta)
    ratios = {
        "g_over_omega_c": g / bath.omega_c,
        "adiabatic": protocol.nu / (2.0 * protocol.delta**2 * kappa**2),
        "nu_over_2omega_c": protocol.nu / (2.0 * bath.omega_c),
        "beta2_g2": bath.beta**2 * g**2,
    }
    return {
        "g": g,
        "kappa": kappa,
        "checks": {name: {"value": value, "flag": _flag(value)} for name, value in ratios.items()},
    }
