import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fourierdirac import operators
from fourierdirac.operators import (KernelKind, det_sweep, dirichlet_kernel, dyson_potential, fredholm_dets,
                                    kernel_matrix, s_of_a)
from fourierdirac.specfun import gauss_legendre


def test_kind_parsing():
    assert KernelKind.parse("cosine") is KernelKind.COSINE
    assert KernelKind.parse("-") is KernelKind.SINE
    with pytest.raises(ValueError):
        KernelKind.parse("tan")


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_squared_kernel_is_dirichlet(kind):
    # F^2 on [0, 1] is the Dirichlet kernel in the scaled variable
    op = kernel_matrix(0.8, kind, 64)
    t = op.grid.nodes
    ref = dirichlet_kernel(s_of_a(0.8), kind, t[:, None], t[None, :])
    assert np.max(np.abs(op.squared_kernel() - ref)) < 1e-10


def test_dirichlet_kernel_against_quadrature():
    s, x, y = 3.1, 0.37, 0.81
    # int_0^1 4a^2 cos(s x r) cos(s r y) dr with 2 a^2 = s / pi
    ref = quad(lambda r: 2 * s / math.pi * math.cos(s * x * r) * math.cos(s * r * y), 0, 1, epsabs=1e-14)[0]
    assert dirichlet_kernel(s, "cos", np.array(x), np.array(y)) == pytest.approx(ref, abs=1e-13)
    diag = dirichlet_kernel(s, "sin", np.array(0.5), np.array(0.5))
    assert diag == pytest.approx(s / math.pi - math.sin(s) / math.pi, rel=1e-13)


@pytest.mark.parametrize("kind", ["cos", "sin"])
@pytest.mark.parametrize("a", [0.3, 0.9, 1.4])
def test_determinants_are_eigenvalue_products(kind, a):
    op = kernel_matrix(a, kind, 64)
    lam = op.eigenvalues()
    rec = fredholm_dets(a, kind, 64)
    # double-precision eigenvalues carry absolute error ~1e-15, amplified by 1/(1 -/+ lam)
    tol = 1e-13 * (1 + np.sum(1 / (1 - np.abs(lam))))
    assert rec.log_det_plus == pytest.approx(np.sum(np.log1p(lam)), abs=tol)
    assert rec.log_det_minus == pytest.approx(np.sum(np.log1p(-lam)), abs=tol)
    assert op.spectral_radius() < 1


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_quadrature_converged_at_64(kind):
    for a in (0.5, 1.0, 1.26):
        lo, hi = fredholm_dets(a, kind, 64), fredholm_dets(a, kind, 128)
        assert lo.log_det_d == pytest.approx(hi.log_det_d, abs=1e-11)


def test_extended_precision_oracle_at_s6():
    # s = 6 runs in extended precision; an independent double-precision LU at 200
    # nodes with eigen-decomposition agrees to the conditioning of det(1 - F)
    a = operators.a_of_s(6.0)
    rec = fredholm_dets(a, "cos", 96)
    grid = gauss_legendre(200)
    sw = np.sqrt(grid.weights)
    m = sw[:, None] * 2 * a * np.cos(6.0 * np.outer(grid.nodes, grid.nodes)) * sw[None, :]
    lam = np.linalg.eigvalsh(m)
    assert rec.log_det_plus == pytest.approx(np.sum(np.log1p(lam)), abs=1e-10)
    assert rec.log_det_minus == pytest.approx(np.sum(np.log1p(-lam)), rel=1e-6)
    assert rec.precision_bits > 53


def test_small_a_first_order():
    # det(1 -/+ F) = 1 -/+ tr F + O(a^2) with tr F = 2a int_0^1 cos(s t^2) dt
    a = 1e-3
    rec = fredholm_dets(a, "cos", 32)
    assert rec.det_plus - 1 == pytest.approx(2 * a, rel=1e-5)
    assert 1 - rec.det_minus == pytest.approx(2 * a, rel=1e-5)


def test_full_kernel_parity_split():
    # on [-1, 1] the kernel 2a exp(-2 pi i a^2 x y) splits into the even cosine
    # and odd sine parts; det(1 - K^2) = det(1 - D+) det(1 - D-)
    a, n = 0.9, 64
    x, w = np.polynomial.legendre.leggauss(2 * n)
    sw = np.sqrt(w)
    s = s_of_a(a)
    dfull = sw[:, None] * (np.sin(s * (x[:, None] - x[None, :]) + 1e-300) /
                           (np.pi * np.where(x[:, None] == x[None, :], np.inf, x[:, None] - x[None, :]))) * sw[None, :]
    np.fill_diagonal(dfull, s / np.pi * w)
    full = np.linalg.slogdet(np.eye(2 * n) - dfull)[1]
    split = fredholm_dets(a, "cos", n).log_det_d + fredholm_dets(a, "sin", n).log_det_d
    assert full == pytest.approx(split, abs=1e-10)


@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_factorization_at_n64(kind):
    for a in np.linspace(0.2, 1.5, 14):
        assert fredholm_dets(a, kind, 64).factorization_residual < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.6), st.sampled_from(["cos", "sin"]))
def test_determinant_ordering(a, kind):
    rec = fredholm_dets(a, kind, 64)
    assert 0 < rec.det_d < 1
    if kind == "cos":
        assert rec.det_plus > rec.det_minus > 0
    assert rec.factorization_residual < 1e-11


def test_sweep_monotone_and_validation():
    records = det_sweep(np.linspace(0.1, 1.5, 8), "cos")
    assert np.all(np.diff([r.log_det_d for r in records]) < 0)
    with pytest.raises(ValueError):
        det_sweep([], "cos")
    with pytest.raises(ValueError):
        det_sweep([0.5, 0.4], "cos")
    with pytest.raises(ValueError):
        fredholm_dets(-1.0, "cos")


def test_dyson_potential_small_s_limits():
    # log D+ = -2s/pi - 2s^2/pi^2 + O(s^3) gives W+(0) = 8/pi^2 - 1; D- = O(s^3) gives W-(0) = -1
    s, w = dyson_potential(np.linspace(0.05, 0.1, 5), "cos")
    slope, intercept = np.polyfit(s, w, 1)
    assert intercept == pytest.approx(8 / math.pi**2 - 1, abs=1e-3)
    s, w = dyson_potential(np.linspace(0.05, 0.1, 5), "sin")
    slope, intercept = np.polyfit(s, w, 1)
    assert intercept == pytest.approx(-1.0, abs=1e-3)
    with pytest.raises(ValueError):
        dyson_potential([1.0, 2.0], "cos")
