import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fourierdirac.operators import fredholm_dets
from fourierdirac.phi_solver import (identity_residuals, jost_integral, mu, phi_euler, phi_eval,
                                     phisys_residual, solve_phi)


@pytest.mark.parametrize("kind", ["cos", "sin"])
@pytest.mark.parametrize("sign", [1, -1])
def test_solution_residual(kind, sign):
    sol = solve_phi(0.9, kind, sign)
    assert sol.residual() < 1e-12
    assert phi_eval(sol, sol.grid.nodes) == pytest.approx(sol.values, abs=0)
    assert sol.endpoint == pytest.approx(phi_eval(sol, 1.0), rel=1e-12)


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_nystrom_extension_solves_continuous_equation(kind):
    # check g(t) + sign int_0^1 K(t, r) g(r) dr = rhs(t) off the nodes with adaptive quadrature
    a, sign = 1.1, -1
    sol = solve_phi(a, kind, sign)
    trig = math.cos if kind == "cos" else math.sin
    for t in (0.0, 0.137, 0.5, 0.93):
        integral = quad(lambda r: 2 * a * trig(sol.s * t * r) * phi_eval(sol, r), 0, 1, limit=200, epsabs=1e-13)[0]
        lhs = phi_eval(sol, t) + sign * integral
        assert lhs == pytest.approx(2 * trig(sol.s * t), abs=1e-9 * max(1, abs(sol.endpoint)))


def test_euler_operator_matches_finite_difference():
    sol = solve_phi(0.7, "cos", 1)
    t, h = 0.6, 1e-5
    fd = t * (phi_eval(sol, t + h) - phi_eval(sol, t - h)) / (2 * h)
    assert phi_euler(sol, t) == pytest.approx(fd, rel=1e-8)


def test_sign_validation():
    with pytest.raises(ValueError):
        solve_phi(0.5, "cos", 0)
    with pytest.raises(ValueError):
        phi_eval(solve_phi(0.5, "cos", 1), -0.1)


def test_mu_small_a():
    # mu ~ 4a for the cosine kernel; the sine kernel starts at third order, 8 pi a^3
    a = 1e-3
    assert mu(a, "cos").mu / a == pytest.approx(4.0, rel=1e-4)
    assert mu(a, "sin").mu / (8 * math.pi * a**3) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("kind", ["cos", "sin"])
@pytest.mark.parametrize("a", [0.3, 0.9, 1.3])
def test_identity_residuals(kind, a):
    res = identity_residuals(a, kind)
    assert res.max() < 1e-6
    assert res.mu_squared < 1e-5


def test_mu_is_log_ratio_derivative_against_coarse_difference():
    # independent of the Richardson stencil: a plain centred difference at h = 1e-4
    a, h = 0.8, 1e-4
    lr = lambda x: fredholm_dets(x, "cos", 64).log_det_plus - fredholm_dets(x, "cos", 64).log_det_minus
    fd = a * (lr(a + h) - lr(a - h)) / (2 * h)
    assert mu(a, "cos").mu == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_phisys(kind):
    for a in (0.4, 0.8):
        assert phisys_residual(a, kind=kind).max() < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 1.5), st.sampled_from(["cos", "sin"]))
def test_endpoint_identity_property(a, kind):
    res = identity_residuals(a, kind)
    assert res.endpoint_plus < 1e-6 and res.endpoint_minus < 1e-6


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_jost_integral_against_fourier_quadrature(gamma):
    a = 0.6
    sol = solve_phi(a, "cos", 1)
    # with t = e^{-w}: int_0^inf g(e^{-w}) e^{-w/2} e^{i gamma w} dw as a Fourier integral (QUADPACK QAWF)
    f = lambda w: phi_eval(sol, math.exp(-w)) * math.exp(-0.5 * w)
    kw = dict(wvar=gamma, limlst=200, epsabs=1e-13)
    ref = complex(quad(f, 0, np.inf, weight="cos", **kw)[0], quad(f, 0, np.inf, weight="sin", **kw)[0])
    s = complex(0.5, gamma)
    ref *= cmath.exp((1 - s) * math.log(a))
    assert abs(jost_integral(a, gamma, sol=sol) - ref) < 1e-10


def test_jost_integral_small_a():
    # g^+ -> 2 as a -> 0, so I -> 2 a^{1-s} / (1 - s) with relative correction O(a)
    gamma = 1.0
    s = complex(0.5, gamma)
    for a in (1e-2, 1e-3):
        lead = 2 * cmath.exp((1 - s) * math.log(a)) / (1 - s)
        rel = abs(jost_integral(a, gamma) / lead - 1)
        assert rel < 3 * a
