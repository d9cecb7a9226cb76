import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourierdirac import spectral
from fourierdirac.specfun import chi_minus, chi_plus


def test_uniform_grid():
    u = spectral.uniform_grid(-1.0, 1.0, 0.1)
    assert u.size == 21 and u[0] == -1.0 and u[-1] == 1.0
    for bad in ((1.0, 1.0, 0.1), (0.0, 1.0, 0.0), (1.0, 0.0, 0.1)):
        with pytest.raises(ValueError):
            spectral.uniform_grid(*bad)


def test_profile_small_a(profile_cos, profile_sin):
    # mu ~ 4 e^u (cosine) and 8 pi e^{3u} (sine) as u -> -inf
    u = -8.0
    assert profile_cos.mu_at(u) / (4 * math.exp(u)) == pytest.approx(1.0, abs=2e-3)
    assert profile_sin.mu_at(u) / (8 * math.pi * math.exp(3 * u)) == pytest.approx(1.0, abs=2e-3)
    # branch potentials are -/+ 4 e^u to leading order, not zero, at u = -8
    assert profile_cos.v_at(u, "A") == pytest.approx(-4 * math.exp(u), rel=1e-2)
    assert profile_cos.v_at(u, "B") == pytest.approx(4 * math.exp(u), rel=1e-2)


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_profile_assembly(profiles, kind):
    prof = profiles[kind]
    sel = (prof.u >= -3) & (prof.u <= 0.6)
    assert np.max(prof.assembly_mismatch()[sel]) < 1e-6
    assert np.all(prof.mu > 0)
    rows = prof.rows()
    assert len(rows) == prof.u.size and set(rows[0]) >= {"u", "a", "mu", "v_plus", "v_minus"}
    with pytest.raises(ValueError):
        prof.mu_at(prof.u_max + 1)


def test_profile_from_samples_is_identical(profile_cos):
    rebuilt = spectral.potential_profile("cos", profile_cos.u, samples=spectral.profile_samples(profile_cos))
    assert np.array_equal(rebuilt.mu, profile_cos.mu)
    assert np.array_equal(rebuilt.v_plus, profile_cos.v_plus)


@pytest.mark.parametrize("kind", ["cos", "sin"])
@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_dirac_solution(profiles, kind, gamma):
    prof = profiles[kind]
    stt = spectral.dirac_integrate(gamma, kind, prof)
    assert stt.alpha[-1] == 1.0
    assert stt.dirac_residual(prof) < 1e-8
    ra, rb = stt.schrodinger_residuals(prof)
    assert ra < 1e-7 and rb < 1e-7


def test_dirac_rejects_turning_point_outside(profile_cos):
    gmax = math.sqrt(profile_cos.v_at(profile_cos.u_max, "A")) / 2
    with pytest.raises(ValueError, match="turning point"):
        spectral.dirac_integrate(1.01 * gmax, "cos", profile_cos)
    with pytest.raises(ValueError):
        spectral.dirac_integrate(1.0, "sin", profile_cos)


@pytest.mark.parametrize("branch", ["A", "B"])
def test_darboux_pairing(profile_cos, branch):
    rep = spectral.darboux_pairing(1.0, "cos", profile_cos, branch)
    assert rep.spread < 1e-6


def test_wronskian_constant(profile_cos):
    g = 1.0
    bounded = spectral.schrodinger_bounded(g, profile_cos.v_plus, profile_cos.u, free_level=1e-2)
    u0 = profile_cos.u_min
    other = spectral.schrodinger_ivp(g, profile_cos.v_plus, profile_cos.u, u0,
                                     (math.cos(g * u0), -g * math.sin(g * u0)), steps=bounded.u.size - 1)
    w = spectral.wronskian(bounded, other)
    assert np.max(np.abs(w - w[0])) / abs(w[0]) < 1e-8


def test_schrodinger_free_level_guard(profile_cos):
    # V(-12) ~ 2.5e-5 exceeds the strict default level
    with pytest.raises(ValueError, match="free region"):
        spectral.schrodinger_bounded(1.0, profile_cos.v_minus, profile_cos.u)


@pytest.mark.parametrize("gamma", [0.5, 1.5, 3.0, 5.0])
def test_scattering_cosine(profile_cos, gamma):
    ra = spectral.scattering_matrix(gamma, "cos", "A", profile_cos)
    rb = spectral.scattering_matrix(gamma, "cos", "B", profile_cos)
    assert ra.phase_error < 1e-3 and rb.phase_error < 1e-3
    assert abs(ra.S - chi_plus(gamma)) < 1e-3
    assert abs(rb.S + chi_plus(gamma)) < 1e-3
    assert ra.modulus_error < 1e-10 and ra.converged


@pytest.mark.parametrize("gamma", [0.5, 2.5])
def test_scattering_sine(profile_sin, gamma):
    for branch, sign in (("A", 1), ("B", -1)):
        rec = spectral.scattering_matrix(gamma, "sin", branch, profile_sin)
        assert abs(rec.S - sign * chi_minus(gamma)) < 1e-6


def test_scattering_schrodinger_route_agrees(profile_cos):
    d = spectral.scattering_matrix(1.0, "cos", "A", profile_cos)
    s = spectral.scattering_matrix(1.0, "cos", "A", profile_cos, method="schrodinger")
    assert abs(d.S - s.S) < 1e-3


def test_scattering_at_zero(profile_cos):
    assert spectral.scattering_matrix(0.0, "cos", "A", profile_cos).S == 1
    assert spectral.scattering_matrix(0.0, "cos", "B", profile_cos).S == -1


@settings(max_examples=8, deadline=None)
@given(st.floats(0.3, 5.0))
def test_conjugation_symmetry(profile_cos, gamma):
    pos = spectral.scattering_matrix(gamma, "cos", "A", profile_cos)
    neg = spectral.scattering_matrix(-gamma, "cos", "A", profile_cos)
    assert abs(neg.S - pos.S.conjugate()) < 1e-6


def test_dirac_step_convergence(profile_cos):
    # fourth-order Magnus: successive differences at the fixed endpoint u_min shrink by ~16
    ends = [spectral.dirac_integrate(1.0, "cos", profile_cos, h=h) for h in (0.08, 0.04, 0.02, 0.01)]
    vals = np.array([[s.alpha[0], s.beta[0]] for s in ends])
    d = np.max(np.abs(np.diff(vals, axis=0)), axis=1)
    orders = np.log2(d[:-1] / d[1:])
    assert np.all((orders > 3.5) & (orders < 4.5))


def test_scattering_no_free_region(profile_cos):
    with pytest.raises(ValueError, match="free region"):
        spectral.scattering_matrix(0.001, "cos", "A", profile_cos)


def test_reference_branch_sign():
    assert spectral.scattering_reference(1.0, "cos", "B") == -chi_plus(1.0)
    assert spectral.scattering_reference(1.0, "sin", "A") == pytest.approx(chi_minus(1.0), abs=1e-15)


def test_jost(profile_cos, profile_sin):
    rep = spectral.jost_verify(1.0, profile_cos, u_probe=-16.0)
    assert rep.ode_residual < 1e-4
    assert rep.approach < 1e-6
    assert rep.s_difference < 1e-3
    with pytest.raises(ValueError):
        spectral.jost_verify(1.0, profile_sin)


def test_jost_approach_rate():
    # |J - e^{-i gamma u}| ~ 2 e^u / |1 - s|, so it shrinks by e per unit u
    g = 1.0
    d = [abs(spectral.jost_solution(g, [u])[0] - cmath.exp(-1j * g * u)) for u in (-10.0, -9.0)]
    assert d[1] / d[0] == pytest.approx(math.e, rel=1e-2)
    assert d[0] == pytest.approx(2 * math.exp(-10) / abs(complex(0.5, -g)), rel=1e-3)


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_asymptotic_fit(kind):
    fit = spectral.asymptotic_fit(kind)
    assert fit["c2"] == pytest.approx(-0.25, abs=5e-3)
    assert fit["c1"] == pytest.approx(-0.5 if kind == "cos" else 0.5, abs=2e-2)
    assert fit.stderr("c2") < 1e-3 and fit.condition < 1e12
    assert set(fit.as_dict()) >= {"c2", "c1", "clog", "c0"}


def test_asymptotic_fit_validation():
    with pytest.raises(ValueError):
        spectral.asymptotic_fit("cos", (3.0, 10.0), points=5)
    with pytest.raises(ValueError):
        spectral.asymptotic_fit("cos", (10.0, 3.0))


def test_product_fit():
    assert spectral.product_fit()["c2"] / -0.5 == pytest.approx(1.0, abs=1e-2)


def test_structure_zeros_stable(profile_cos):
    coarse = spectral.structure_zeros(0.0, 30.0, "cos", profile_cos, dgamma=0.2)
    fine = spectral.structure_zeros(0.0, 30.0, "cos", profile_cos, dgamma=0.1)
    eigen = spectral.structure_zeros(0.0, 30.0, "cos", profile_cos, dgamma=0.2, closure="eigen")
    assert coarse.count == fine.count == eigen.count >= 2
    assert np.max(np.abs(coarse.zeros - fine.zeros)) < 1e-6
    assert np.max(np.abs(coarse.zeros - eigen.zeros)) < 1e-6
    assert np.array_equal(coarse.signed(), np.concatenate([-coarse.zeros[::-1], coarse.zeros]))


def test_structure_zeros_match_free_phase_count(profile_cos):
    zs = spectral.structure_zeros(-2.0, 20.0, "cos", profile_cos, dgamma=0.1)
    assert abs(zs.count - spectral.free_zero_count(20.0, -2.0)) <= 1


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_second_log_derivatives(kind):
    res = spectral.log_derivative_residuals(kind, np.linspace(-3, 0.6, 7))
    assert max(res.max().values()) < 1e-8
