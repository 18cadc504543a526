import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from polaron_fcs.bath import BathParams
from polaron_fcs.system import (IDENTITY, SIGMA_X, DriveProtocol, Frame, coupling_strength, dagger,
                                effective_kappa, eigenframe, free_energy_ps, hamiltonian, jump_operators,
                                propagator_exp, thermal_state, validity_report, work_generator)

PROTO = DriveProtocol(nu=0.1, t_i=-100.0, t_f=100.0)


# ---------------------------------------------------------------- protocol / frame

def test_protocol_validation():
    with pytest.raises(ValueError):
        DriveProtocol(0.1, 10.0, -10.0)
    with pytest.raises(ValueError):
        DriveProtocol(-0.1, -10.0, 10.0)
    with pytest.raises(ValueError):
        DriveProtocol(0.1, -10.0, 10.0, delta=0.0)
    # a static Hamiltonian is allowed for fixed-point checks
    assert DriveProtocol(0.0, -1.0, 1.0).omega0(5.0) == 0.0


def test_energy_change():
    assert PROTO.energy_change == pytest.approx(10.0)
    assert DriveProtocol(0.1, -100, 50).energy_change == pytest.approx(7.5)


@pytest.mark.parametrize("name,expected", [("pme", Frame.POLARON), ("Polaron", Frame.POLARON),
                                           ("wcme", Frame.WEAK), ("weak-coupling", Frame.WEAK)])
def test_frame_parse(name, expected):
    assert Frame.parse(name) is expected
    assert Frame.parse(expected) is expected


def test_frame_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Frame.parse("lab")


def test_effective_kappa():
    assert effective_kappa(Frame.POLARON, 0.44) == 0.44
    assert effective_kappa("weak", 0.44) == 1.0


# ---------------------------------------------------------------- eigenframe

@pytest.mark.parametrize("frame,kappa", [(Frame.POLARON, 0.44), (Frame.WEAK, 0.44)])
def test_eigenframe_at_crossing(frame, kappa):
    e = eigenframe(0.0, PROTO, frame, kappa)
    assert e.theta == pytest.approx(math.pi / 2)
    assert e.omega == pytest.approx(effective_kappa(frame, kappa))


def test_eigenframe_diabatic_limits():
    assert 0 < eigenframe(1e6, PROTO, Frame.POLARON, 0.44).theta < 1e-5
    th = eigenframe(-1e6, PROTO, Frame.POLARON, 0.44).theta
    assert math.pi - 1e-5 < th < math.pi


def test_eigenframe_bench_endpoint():
    # [DERIVED] arithmetic oracle sqrt(100 + 0.44^2)
    e = eigenframe(-100.0, PROTO, Frame.POLARON, 0.44)
    assert e.omega == pytest.approx(math.sqrt(100 + 0.1936), rel=1e-14)
    assert e.omega == pytest.approx(10.00968, abs=5e-6)


@given(st.floats(-200, 200), st.floats(0.05, 1.0), st.floats(0.01, 2.0))
def test_eigenframe_derivatives_match_finite_difference(t, kappa, nu):
    # [DERIVED] central difference of theta(t), omega(t)
    p = DriveProtocol(nu, -300, 300)
    h = 1e-5
    e = eigenframe(t, p, Frame.POLARON, kappa)
    ep, em = eigenframe(t + h, p, Frame.POLARON, kappa), eigenframe(t - h, p, Frame.POLARON, kappa)
    scale = max(1.0, abs(e.dtheta_dt))
    assert abs((ep.theta - em.theta) / (2 * h) - e.dtheta_dt) < 1e-6 * scale
    assert abs((ep.omega - em.omega) / (2 * h) - e.domega_dt) < 1e-6 * max(1.0, abs(e.domega_dt))


def test_eigenvectors_diagonalise_hamiltonian():
    for t in (-100.0, -3.0, 0.0, 0.7, 100.0):
        e = eigenframe(t, PROTO, Frame.POLARON, 0.44)
        h = hamiltonian(t, PROTO, Frame.POLARON, 0.44)
        d = e.to_eigenbasis(h)
        assert np.allclose(d, np.diag([e.omega / 2, -e.omega / 2]), atol=1e-13)
        v = e.eigenvectors()
        assert np.allclose(dagger(v) @ v, IDENTITY, atol=1e-15)


def test_eigenvector_continuity():
    # overlaps <e_n(t)|e_n(t+h)> stay positive through the crossing
    ts = np.arange(-100.0, 100.0, 1e-3)
    vs = np.array([eigenframe(t, PROTO, Frame.POLARON, 0.44).eigenvectors() for t in ts[::50]])
    overlaps = np.einsum("kin,kin->kn", vs[:-1].conj(), vs[1:]).real
    assert np.all(overlaps > 0)
    # fine spacing near the crossing
    fine = np.arange(-1.0, 1.0, 1e-3)
    vf = np.array([eigenframe(t, PROTO, Frame.POLARON, 0.44).eigenvectors() for t in fine])
    assert np.all(np.einsum("kin,kin->kn", vf[:-1].conj(), vf[1:]).real > 0)


def test_half_angles_accurate_in_diabatic_limits():
    e = eigenframe(1e7, PROTO, Frame.POLARON, 0.44)
    c, s = e.half_angles
    assert c**2 + s**2 == pytest.approx(1.0, abs=1e-15)
    assert s == pytest.approx(math.sin(e.theta / 2), rel=1e-12)


# ---------------------------------------------------------------- Hamiltonian

def test_hamiltonian_crossing_kappa_one():
    h = hamiltonian(0.0, PROTO, Frame.POLARON, 1.0)
    assert np.allclose(h, 0.5 * SIGMA_X)
    assert np.allclose(np.linalg.eigvalsh(h), [-0.5, 0.5])


@given(st.floats(-200, 200))
def test_hamiltonian_hermitian_traceless(t):
    h = hamiltonian(t, PROTO, Frame.POLARON, 0.44)
    assert np.allclose(h, dagger(h))
    assert abs(np.trace(h)) == 0


def test_hamiltonian_eigenvalues_bench():
    # [DERIVED] 2x2 eigen oracle
    vals = np.linalg.eigvalsh(hamiltonian(-100.0, PROTO, Frame.POLARON, 0.44))
    assert vals == pytest.approx([-5.00484, 5.00484], abs=5e-6)


def test_weak_frame_uses_bare_tunnelling():
    h = hamiltonian(0.0, PROTO, Frame.WEAK, 0.44)
    assert np.allclose(h, 0.5 * SIGMA_X)


# ---------------------------------------------------------------- jump operators

def test_jump_operators_at_crossing():
    e = eigenframe(0.0, PROTO, Frame.POLARON, 0.44)
    ops = {(o.label, o.index): o for o in jump_operators(0.0, Frame.POLARON, e)}
    assert np.allclose(ops["x", "+"].matrix, 0, atol=1e-16)
    assert np.allclose(ops["x", "-"].matrix, 0, atol=1e-16)
    assert np.linalg.norm(ops["x", "0"].matrix, 2) == pytest.approx(0.5)
    assert ops["x", "+"].frequency == -e.omega and ops["x", "-"].frequency == e.omega
    assert ops["x", "0"].frequency == 0.0


@given(st.floats(-150, 150), st.sampled_from([Frame.POLARON, Frame.WEAK]))
def test_jump_operator_adjoint_pairs(t, frame):
    e = eigenframe(t, PROTO, frame, 0.44)
    ops = {(o.label, o.index): o.matrix for o in jump_operators(t, frame, e)}
    for label in {k[0] for k in ops}:
        assert np.allclose(ops[label, "+"], dagger(ops[label, "-"]))


def test_jump_operator_eigenbasis_form():
    t = -7.3
    e = eigenframe(t, PROTO, Frame.POLARON, 0.44)
    ops = {(o.label, o.index): o.matrix for o in jump_operators(t, Frame.POLARON, e, delta=1.0)}
    up = np.array([[0, 1], [0, 0]])
    assert np.allclose(e.to_eigenbasis(ops["x", "+"]), 0.5 * math.cos(e.theta) * up, atol=1e-15)
    assert np.allclose(e.to_eigenbasis(ops["y", "+"]), -0.5j * up, atol=1e-15)
    assert np.allclose(e.to_eigenbasis(ops["x", "0"]), 0.5 * math.sin(e.theta) * np.diag([1, -1]), atol=1e-15)


def test_weak_jump_operators_at_crossing():
    e = eigenframe(0.0, PROTO, Frame.WEAK, 0.44)
    ops = jump_operators(0.0, Frame.WEAK, e)
    assert [o.label for o in ops] == ["z", "z"]
    plus = ops[0].matrix
    assert np.allclose(np.abs(plus), np.abs(np.outer(e.eigenvectors()[:, 0], e.eigenvectors()[:, 1].conj())))


def test_y_sign_is_phase_only():
    t = 3.1
    e = eigenframe(t, PROTO, Frame.POLARON, 0.44)
    x = np.array([[0.3, 0.1 - 0.2j], [0.4j, 0.7]])
    for a, b in zip(jump_operators(t, Frame.POLARON, e, y_sign=1.0), jump_operators(t, Frame.POLARON, e, y_sign=-1.0)):
        d1 = a.matrix @ x @ dagger(a.matrix) - 0.5 * (dagger(a.matrix) @ a.matrix @ x + x @ dagger(a.matrix) @ a.matrix)
        d2 = b.matrix @ x @ dagger(b.matrix) - 0.5 * (dagger(b.matrix) @ b.matrix @ x + x @ dagger(b.matrix) @ b.matrix)
        assert np.allclose(d1, d2, atol=1e-16)


# ---------------------------------------------------------------- work generator

def test_work_generator_trivial_cases():
    assert np.allclose(work_generator(3.0, 0.0, PROTO, Frame.POLARON, 0.44), 0)
    static = DriveProtocol(0.0, -10, 10)
    assert np.allclose(work_generator(3.0, 1.7 + 0.3j, static, Frame.POLARON, 0.44), 0)


def _fd_work_generator(t, eta, protocol, kappa, d=1e-6):
    # [DERIVED] central finite difference of the matrix exponential (scipy expm)
    e = lambda s: expm(1j * eta * hamiltonian(s, protocol, Frame.POLARON, kappa))
    return (e(t + d) - e(t - d)) / (2 * d) @ expm(-1j * eta * hamiltonian(t, protocol, Frame.POLARON, kappa))


@given(st.floats(-100, 100), st.floats(-5, 5), st.floats(-1, 1))
def test_work_generator_matches_finite_difference(t, eta_re, eta_im):
    eta = complex(eta_re, eta_im)
    m = work_generator(t, eta, PROTO, Frame.POLARON, 0.44)
    assert np.max(np.abs(m - _fd_work_generator(t, eta, PROTO, 0.44))) < 1e-6


@pytest.mark.parametrize("t", [-100.0, -0.5, 0.0, 2.0, 100.0])
def test_work_generator_at_imaginary_beta(t):
    m = work_generator(t, 1j, PROTO, Frame.POLARON, 0.44)
    assert np.max(np.abs(m - _fd_work_generator(t, 1j, PROTO, 0.44))) < 1e-6


def test_propagator_exp_matches_expm():
    for eta in (0.3, -2.0, 1j, 0.5 - 0.2j):
        h = hamiltonian(-4.0, PROTO, Frame.POLARON, 0.44)
        assert np.allclose(propagator_exp(-4.0, eta, PROTO, Frame.POLARON, 0.44), expm(1j * eta * h), atol=1e-12)


# ---------------------------------------------------------------- thermal state / free energy

def test_thermal_state_matches_expm():
    h = hamiltonian(-2.0, PROTO, Frame.POLARON, 0.44)
    ref = expm(-1.3 * h)
    ref /= np.trace(ref)
    assert np.allclose(thermal_state(-2.0, PROTO, Frame.POLARON, 0.44, 1.3), ref, atol=1e-14)


def test_thermal_state_zero_temperature():
    rho = thermal_state(0.0, PROTO, Frame.POLARON, 0.44, math.inf)
    vals, vecs = np.linalg.eigh(hamiltonian(0.0, PROTO, Frame.POLARON, 0.44))
    ground = vecs[:, 0]
    assert np.allclose(rho, np.outer(ground, ground.conj()))


def test_free_energy_symmetric_protocol():
    assert free_energy_ps(PROTO.t_f, PROTO, 0.44, 1.0) - free_energy_ps(PROTO.t_i, PROTO, 0.44, 1.0) == 0.0


def test_free_energy_zero_temperature_limit():
    omega = math.hypot(10, 0.44)
    assert free_energy_ps(100.0, PROTO, 0.44, 1e8) == pytest.approx(-omega / 2, rel=1e-12)


def test_free_energy_bench_value():
    # [DERIVED] arithmetic oracle
    assert free_energy_ps(100.0, PROTO, 0.44, 1.0) == pytest.approx(-5.00489, abs=1e-5)


@given(st.floats(-50, 50), st.floats(0.1, 5))
def test_free_energy_matches_partition_function(t, beta):
    h = hamiltonian(t, PROTO, Frame.POLARON, 0.44)
    z = np.trace(expm(-beta * h)).real
    assert free_energy_ps(t, PROTO, 0.44, beta) == pytest.approx(-math.log(z) / beta, rel=1e-12)


def test_free_energy_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        free_energy_ps(0.0, PROTO, 0.44, 0.0)


# ---------------------------------------------------------------- validity

def test_validity_bench_adiabatic_warn(bench_bath, bench_kappa):
    rep = validity_report(PROTO, bench_bath, bench_kappa)
    adiabatic = rep["checks"]["adiabatic"]
    assert adiabatic["value"] == pytest.approx(0.1 / (2 * bench_kappa**2))
    assert adiabatic["value"] == pytest.approx(0.26, abs=0.005)
    assert adiabatic["flag"] == "warn"


def test_validity_weak_coupling_pass():
    rep = validity_report(PROTO, BathParams(0.1, 10.0, 1.0), 1.0)
    assert rep["g"] == pytest.approx(0.5)
    assert rep["checks"]["g_over_omega_c"]["value"] == pytest.approx(0.05)
    assert rep["checks"]["g_over_omega_c"]["flag"] == "pass"


def test_validity_static_drive():
    rep = validity_report(DriveProtocol(0.0, -1, 1), BathParams(0.1, 10.0, 1.0), 0.9)
    assert rep["checks"]["adiabatic"] == {"value": 0.0, "flag": "pass"}


def test_validity_fail_flag():
    rep = validity_report(DriveProtocol(50.0, -1, 1), BathParams(0.1, 10.0, 1.0), 1.0)
    assert rep["checks"]["nu_over_2omega_c"]["flag"] == "fail"


def test_coupling_strength_kappa_one():
    assert coupling_strength(1.0) == 0.5


def test_adiabatic_parameter_peaks_at_crossing():
    # |dtheta/dt| / (2 omega) is largest at t = 0, where it equals nu / (2 Delta^2 kappa^2)
    kappa = 0.44
    ts = np.linspace(-100, 100, 4001)
    vals = [abs(e.dtheta_dt) / (2 * e.omega) for e in (eigenframe(t, PROTO, Frame.POLARON, kappa) for t in ts)]
    assert ts[int(np.argmax(vals))] == 0.0
    assert max(vals) == pytest.approx(PROTO.nu / (2 * kappa**2))
