"""Potentials in u = log a, the Dirac system, Schrodinger scattering from -inf
back to -inf, the Jost solution, determinant asymptotics and zeros of the
backward-integrated structure function.

The Dirac system is

    alpha' = -mu alpha - gamma beta,    beta' = gamma alpha + mu beta,

so alpha solves -psi'' + (mu^2 - mu') psi = gamma^2 psi (branch A) and beta the
Darboux partner with mu^2 + mu' (branch B). Solutions are integrated backward
from u_max, where the potential is large, so that the solution square-integrable
at +inf is the one that grows in the integration direction.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq

from . import _nystrom, magnus
from .numerics import first_derivative, grid_derivative, schrodinger_residual, second_derivative
from .operators import KernelKind
from .phi_solver import jost_integral, solve_phi
from .specfun import chi_phase

__all__ = [
    "PotentialProfile",
    "DiracState",
    "SchrodingerState",
    "ScatterRecord",
    "JostReport",
    "AsymptoticFit",
    "ZeroScan",
    "LogDerivativeResiduals",
    "uniform_grid",
    "potential_profile",
    "profile_samples",
    "dirac_integrate",
    "schrodinger_bounded",
    "wronskian",
    "schrodinger_ivp",
    "darboux_pairing",
    "PairingReport",
    "scattering_matrix",
    "scattering_reference",
    "jost_solution",
    "jost_verify",
    "asymptotic_fit",
    "product_fit",
    "structure_zeros",
    "free_zero_count",
    "log_derivative_residuals",
]

# largest a for which the default node rule and precision policy were validated
A_MAX = 4.5


def _branch(branch) -> str:
    key = str(branch).strip().upper()
    if key not in ("A", "B"):
        raise ValueError(f"branch must be 'A' or 'B', got {branch!r}")
    return key


def uniform_grid(u_min: float, u_max: float, du: float) -> np.ndarray:
    """Uniform grid from u_min to u_max whose spacing is du rounded to fit."""
    if not u_max > u_min:
        raise ValueError("empty u range: need u_max > u_min")
    if not du > 0:
        raise ValueError("du must be positive")
    count = int(round((u_max - u_min) / du)) + 1
    return np.linspace(u_min, u_max, max(count, 2))


def _check_uniform(u: np.ndarray, minimum: int) -> float:
    if u.ndim != 1 or u.size < minimum:
        raise ValueError(f"need a 1-d grid with at least {minimum} points")
    h = np.diff(u)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * max(1.0, abs(h[0])):
        raise ValueError("u grid must be uniform and increasing")
    return float(np.mean(h))


# ---------------------------------------------------------------- potentials

@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """u-grid samples of mu, mu', and the two Schrodinger potentials.

    ``v_plus``/``v_minus`` are mu^2 -/+ mu' (branches A and B); ``v_plus_det``
    and ``v_minus_det`` are the same potentials assembled as -2 d^2/du^2 of
    log det(1 + F) and log det(1 - F). Off-grid values come from a quintic
    spline of log mu over the grid padded by three points per side.
    """

    kind: KernelKind
    u: np.ndarray
    mu: np.ndarray
    mu_prime: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    v_plus_det: np.ndarray
    v_minus_det: np.ndarray
    log_det_plus: np.ndarray
    log_det_minus: np.ndarray
    nodes: int | None = None
    _u_ext: np.ndarray = field(default=None, repr=False)
    _spline: object = field(default=None, repr=False)
    _samples: tuple = field(default=None, repr=False)

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def u_min(self) -> float:
        return float(self.u[0])

    @property
    def u_max(self) -> float:
        return float(self.u[-1])

    def _check_range(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, hi = self._u_ext[0], self._u_ext[-1]
        if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise ValueError(f"u outside the profile range [{lo:.6g}, {hi:.6g}]")
        return u

    def mu_at(self, u):
        u = self._check_range(u)
        return np.exp(self._spline(u))

    def mu_prime_at(self, u):
        u = self._check_range(u)
        return np.exp(self._spline(u)) * self._spline(u, 1)

    def v_at(self, u, branch="A"):
        """mu^2 - mu' (branch A) or mu^2 + mu' (branch B) at arbitrary u."""
        sgn = -1.0 if _branch(branch) == "A" else 1.0
        u = self._check_range(u)
        m = np.exp(self._spline(u))
        return m * m + sgn * m * self._spline(u, 1)

    def potential(self, branch="A") -> np.ndarray:
        return self.v_plus if _branch(branch) == "A" else self.v_minus

    def assembly_mismatch(self) -> np.ndarray:
        """Per-point max of |v - v_det| / max(1, |v|) over both branches."""
        rp = np.abs(self.v_plus - self.v_plus_det) / np.maximum(1.0, np.abs(self.v_plus))
        rm = np.abs(self.v_minus - self.v_minus_det) / np.maximum(1.0, np.abs(self.v_minus))
        return np.maximum(rp, rm)

    def rows(self) -> list[dict]:
        return [
            {"u": float(u), "a": math.exp(u), "mu": float(m), "mu_prime": float(mp),
             "v_plus": float(vp), "v_minus": float(vm),
             "v_plus_det": float(vpd), "v_minus_det": float(vmd)}
            for u, m, mp, vp, vm, vpd, vmd in zip(
                self.u, self.mu, self.mu_prime, self.v_plus, self.v_minus,
                self.v_plus_det, self.v_minus_det)
        ]


def _profile_samples(kind: KernelKind, u_ext: np.ndarray, nodes, precision):
    mu_ext = np.empty_like(u_ext)
    lp = np.empty_like(u_ext)
    lm = np.empty_like(u_ext)
    for i, u in enumerate(u_ext):
        a = math.exp(float(u))
        ev = _nystrom.evaluate_auto(a, kind.value, nodes, precision)
        mu_ext[i] = a * (ev.end_plus + ev.end_minus)
        lp[i] = ev.log_det_plus
        lm[i] = ev.log_det_minus
    return mu_ext, lp, lm


def potential_profile(kind, u_grid: Sequence[float], nodes: int | None = None,
                      precision="auto", samples=None) -> PotentialProfile:
    """Sample mu on ``u_grid`` and assemble the potentials both ways.

    ``samples`` may supply precomputed (mu, log det(1+F), log det(1-F)) on the
    padded grid, e.g. from a cache.
    """
    kind = KernelKind.parse(kind)
    u = np.array(u_grid, dtype=float)
    du = _check_uniform(u, 9)
    if math.exp(u[-1]) > A_MAX:
        raise ValueError(f"u_max={u[-1]:.4g} exceeds the validated range a <= {A_MAX}")
    u_ext = u[0] + du * np.arange(-3, u.size + 3)
    if samples is None:
        mu_ext, lp, lm = _profile_samples(kind, u_ext, nodes, precision)
    else:
        mu_ext, lp, lm = (np.asarray(x, dtype=float) for x in samples)
        if not (mu_ext.shape == lp.shape == lm.shape == u_ext.shape):
            raise ValueError("sample arrays do not match the padded grid")
    if np.any(mu_ext <= 0):
        raise ArithmeticError("mu is not positive on the grid")
    mu_core = mu_ext[3:-3]
    mu_p = grid_derivative(mu_ext, du, 1)
    vpd = -2.0 * grid_derivative(lp, du, 2)
    vmd = -2.0 * grid_derivative(lm, du, 2)
    spline = make_interp_spline(u_ext, np.log(mu_ext), k=5)

    def ro(x):
        x = np.array(x, dtype=float)
        x.setflags(write=False)
        return x

    return PotentialProfile(
        kind=kind,
        u=ro(u),
        mu=ro(mu_core),
        mu_prime=ro(mu_p),
        v_plus=ro(mu_core**2 - mu_p),
        v_minus=ro(mu_core**2 + mu_p),
        v_plus_det=ro(vpd),
        v_minus_det=ro(vmd),
        log_det_plus=ro(lp[3:-3]),
        log_det_minus=ro(lm[3:-3]),
        nodes=nodes,
        _u_ext=ro(u_ext),
        _spline=spline,
        _samples=(ro(mu_ext), ro(lp), ro(lm)),
    )


def profile_samples(profile: PotentialProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Padded-grid (mu, log det(1+F), log det(1-F)) that rebuild ``profile``."""
    return tuple(np.array(x) for x in profile._samples)


# ---------------------------------------------------------------- ODE solutions

@dataclass(frozen=True, eq=False)
class DiracState:
    """Backward-integrated solution (alpha, beta) of the Dirac system at one gamma,
    on an increasing uniform u grid; the scale is fixed by alpha(u_max) = 1."""

    gamma: float
    kind: KernelKind
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    closure: str

    @property
    def h(self) -> float:
        return float(self.u[1] - self.u[0])

    def derivatives(self, profile: PotentialProfile) -> tuple[np.ndarray, np.ndarray]:
        m = profile.mu_at(self.u)
        g = self.gamma
        return -m * self.alpha - g * self.beta, g * self.alpha + m * self.beta

    def dirac_residual(self, profile: PotentialProfile, window: float = 1.0) -> float:
        """Windowed relative residual of both first-order equations by 6th-order differences."""
        h = self.h
        m = profile.mu_at(self.u)[3:-3]
        a, b = self.alpha[3:-3], self.beta[3:-3]
        da = grid_derivative(self.alpha, h, 1)
        db = grid_derivative(self.beta, h, 1)
        ra = np.abs(da + m * a + self.gamma * b)
        rb = np.abs(db - self.gamma * a - m * b)
        scale = np.abs(da) + np.abs(m * a) + np.abs(self.gamma * b) + np.abs(db) + np.abs(m * b)
        return _windowed_max_ratio(np.maximum(ra, rb), scale, window, h)

    def schrodinger_residuals(self, profile: PotentialProfile, window: float = 1.0) -> tuple[float, float]:
        """Residuals of alpha against branch A and beta against branch B."""
        h = self.h
        ra = schrodinger_residual(self.alpha, profile.v_at(self.u, "A"), self.gamma, h, window)
        rb = schrodinger_residual(self.beta, profile.v_at(self.u, "B"), self.gamma, h, window)
        return ra, rb


def _windowed_max_ratio(res, scale, window, h) -> float:
    from numpy.lib.stride_tricks import sliding_window_view

    half = max(1, int(round(window / h)))
    padded = np.pad(scale, half, mode="edge")
    local = sliding_window_view(padded, 2 * half + 1).max(axis=1)
    return float(np.max(res / local))


def _default_step(profile: PotentialProfile, gamma: float, h: float | None) -> float:
    if h is not None:
        if not h > 0:
            raise ValueError("step must be positive")
        return float(h)
    rate = max(float(profile.mu_at(profile.u_max)), abs(gamma), 1.0)
    return min(0.5 * profile.du, 0.25 / rate)


def dirac_integrate(gamma: float, kind, profile: PotentialProfile, h: float | None = None,
                    u_stop: float | None = None, closure: str = "balance",
                    backend: str | None = None) -> DiracState:
    """Solution square-integrable at +inf, integrated from profile.u_max down to u_stop.

    ``closure='balance'`` starts from beta/alpha = -gamma/(2 mu); ``'eigen'``
    uses the decaying eigenvector of the frozen coefficient matrix,
    beta/alpha = (kappa - mu)/gamma with kappa = sqrt(mu^2 - gamma^2).
    """
    kind = KernelKind.parse(kind)
    if kind is not profile.kind:
        raise ValueError("profile was built for a different kernel kind")
    gamma = float(gamma)
    u_max = profile.u_max
    u_stop = profile.u_min if u_stop is None else float(u_stop)
    if not u_stop < u_max:
        raise ValueError("u_stop must lie below u_max")
    if profile.v_at(u_max, "A") < 4.0 * gamma * gamma:
        raise ValueError(f"turning point outside grid: V(u_max) < 4 gamma^2 for gamma={gamma}")
    step = _default_step(profile, gamma, h)
    m0 = float(profile.mu_at(u_max))
    if closure == "balance":
        beta0 = -gamma / (2.0 * m0)
    elif closure == "eigen":
        beta0 = 0.0 if gamma == 0 else (math.sqrt(m0 * m0 - gamma * gamma) - m0) / gamma
    else:
        raise ValueError(f"unknown closure {closure!r}")

    def coeffs(u):
        m = profile.mu_at(u)
        return -m, -gamma, gamma

    u, y = magnus.integrate(coeffs, u_max, u_stop, step, (1.0, beta0), backend)
    return DiracState(gamma, kind, u[::-1].copy(), y[::-1, 0].copy(), y[::-1, 1].copy(), closure)


@dataclass(frozen=True, eq=False)
class SchrodingerState:
    """Solution of -psi'' + V psi = gamma^2 psi on an increasing u grid."""

    gamma: float
    u: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray

    @property
    def h(self) -> float:
        return float(self.u[1] - self.u[0])


def _potential_callable(potential, u_grid: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    if callable(potential):
        return potential
    v = np.asarray(potential, dtype=float)
    if v.shape != u_grid.shape:
        raise ValueError("potential samples must match the u grid")
    spline = make_interp_spline(u_grid, v, k=5)
    lo, hi = u_grid[0], u_grid[-1]

    def f(u):
        u = np.asarray(u, dtype=float)
        if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise ValueError("u outside the potential grid")
        return spline(u)

    return f


def schrodinger_bounded(gamma: float, potential, u_grid: Sequence[float], h: float | None = None,
                        u_stop: float | None = None, initial_slope: float | None = None,
                        free_level: float = 1e-6, steps: int | None = None,
                        backend: str | None = None) -> SchrodingerState:
    """Bounded solution by backward integration from u_max with WKB data
    psi = 1, psi' = -sqrt(V - gamma^2).

    ``potential`` is either samples on ``u_grid`` (interpolated by a quintic
    spline) or a callable. ``initial_slope`` overrides psi'(u_max), which gives
    an independent solution for Wronskian checks. ``free_level`` bounds |V(u_min)|.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    du = _check_uniform(u_grid, 7)
    vf = _potential_callable(potential, u_grid)
    gamma = float(gamma)
    u_max = float(u_grid[-1])
    u_min = float(u_grid[0])
    v_top = float(vf(u_max))
    if v_top < 4.0 * gamma * gamma:
        raise ValueError("turning point outside grid: V(u_max) < 4 gamma^2")
    if abs(float(vf(u_min))) > free_level:
        raise ValueError(f"no free region: |V(u_min)| > {free_level:g}")
    u_stop = u_min if u_stop is None else float(u_stop)
    step = h if h is not None else min(0.5 * du, 0.25 / max(math.sqrt(v_top), abs(gamma), 1.0))
    slope = -math.sqrt(v_top - gamma * gamma) if initial_slope is None else float(initial_slope)
    g2 = gamma * gamma

    def coeffs(u):
        return 0.0, 1.0, vf(u) - g2

    u, y = magnus.integrate(coeffs, u_max, u_stop, step, (1.0, slope), backend, steps)
    return SchrodingerState(gamma, u[::-1].copy(), y[::-1, 0].copy(), y[::-1, 1].copy())


def schrodinger_ivp(gamma: float, potential, u_grid: Sequence[float], u_start: float,
                    y0: tuple[float, float], u_stop: float | None = None, h: float | None = None,
                    steps: int | None = None, backend: str | None = None) -> SchrodingerState:
    """Initial-value solve of -psi'' + V psi = gamma^2 psi from ``u_start`` with
    (psi, psi') = y0, towards ``u_stop`` (the opposite end of the grid by default).
    ``steps`` fixes the step count, e.g. to reproduce another solution's grid."""
    u_grid = np.asarray(u_grid, dtype=float)
    du = _check_uniform(u_grid, 7)
    vf = _potential_callable(potential, u_grid)
    lo, hi = float(u_grid[0]), float(u_grid[-1])
    if u_stop is None:
        u_stop = hi if abs(u_start - lo) < abs(u_start - hi) else lo
    step = 0.5 * du if h is None else float(h)
    g2 = float(gamma) ** 2

    def coeffs(u):
        return 0.0, 1.0, vf(u) - g2

    u, y = magnus.integrate(coeffs, float(u_start), float(u_stop), step, y0, backend, steps)
    order = np.argsort(u)
    return SchrodingerState(float(gamma), u[order], y[order, 0].copy(), y[order, 1].copy())


def wronskian(first: SchrodingerState, second: SchrodingerState) -> np.ndarray:
    """psi_1 psi_2' - psi_1' psi_2 on a common grid.

    Conditioning matters: for two solutions dominated by the same exponential
    mode the products dwarf W. Pair the backward bounded solution with a
    forward solve from the free region to keep both factors moderate.
    """
    if first.u.shape != second.u.shape or not np.allclose(first.u, second.u, rtol=0, atol=1e-10):
        raise ValueError("solutions live on different grids")
    return first.psi * second.dpsi - first.dpsi * second.psi


@dataclass(frozen=True)
class PairingReport:
    """psi_dirac ~ c psi_schrodinger; ``spread`` is the largest windowed
    deviation |psi_dirac - c psi_schrodinger| / max_window |psi_dirac| below
    u_max - margin, so a u-independent constant gives spread at rounding level."""

    gamma: float
    branch: str
    constant: float
    spread: float


def darboux_pairing(gamma: float, kind, profile: PotentialProfile, branch="B",
                    margin: float = 0.5, closure: str = "balance", window: float = 1.0,
                    backend: str | None = None) -> PairingReport:
    """Compare the Dirac component (alpha for A, beta for B) with an independent
    bounded solve of the corresponding Schrodinger equation.

    Both solutions start from different closures at u_max; the difference lives
    in the solution that decays backward, so the comparison starts ``margin``
    below u_max.
    """
    branch = _branch(branch)
    st = dirac_integrate(gamma, kind, profile, closure=closure, backend=backend)
    comp = st.alpha if branch == "A" else st.beta
    if not np.any(comp):
        raise ValueError("Dirac component vanishes identically (gamma = 0, branch B)")
    sb = schrodinger_bounded(gamma, lambda x: profile.v_at(x, branch), profile.u,
                             free_level=np.inf, steps=st.u.size - 1, backend=backend)
    if sb.u.shape != st.u.shape:
        raise ArithmeticError("integration grids differ")
    sel = st.u <= profile.u_max - margin
    i0 = np.nonzero(sel)[0][-1]
    c = float(comp[i0] / sb.psi[i0])
    res = np.abs(comp[sel] - c * sb.psi[sel])
    spread = _windowed_max_ratio(res, np.abs(comp[sel]), window, st.h)
    return PairingReport(float(gamma), branch, c, spread)


# ---------------------------------------------------------------- scattering

def scattering_reference(gamma: float, kind, branch) -> complex:
    """chi_+ (cosine) or chi_- (sine); branch B carries an extra factor -1."""
    kind = KernelKind.parse(kind)
    ref = cmath.exp(1j * chi_phase(gamma, kind.value))
    return ref if _branch(branch) == "A" else -ref


@dataclass(frozen=True)
class ScatterRecord:
    """Reflection coefficient S = B/A of psi ~ A e^{-i gamma u} + B e^{+i gamma u}."""

    gamma: float
    kind: KernelKind
    branch: str
    S: complex
    reference: complex
    phase_error: float
    amplitude: float
    u_fit: tuple[float, ...]
    method: str
    convention: str = "S = B/A, psi ~ A exp(-i gamma u) + B exp(+i gamma u)"

    @property
    def modulus_error(self) -> float:
        return abs(abs(self.S) - 1.0)

    @property
    def converged(self) -> bool:
        return self.modulus_error < 1e-3

    def as_row(self) -> dict:
        return {
            "gamma": self.gamma,
            "branch": self.branch,
            "re_s": self.S.real,
            "im_s": self.S.imag,
            "abs_s": abs(self.S),
            "arg_s": cmath.phase(self.S),
            "arg_ref": cmath.phase(self.reference),
            "phase_error": self.phase_error,
        }


def _fit_indices(u: np.ndarray, lo: float, width: float, points: int) -> np.ndarray:
    targets = np.linspace(lo, lo + width, points)
    idx = np.unique(np.abs(u[:, None] - targets[None, :]).argmin(axis=0))
    if idx.size < 2:
        raise ValueError("fit window does not contain enough samples")
    return idx


def _free_wave_coefficients(u, psi, dpsi, gamma):
    e = np.exp(1j * gamma * u)
    amp_a = 0.5 * (psi + 1j * dpsi / gamma) * e
    amp_b = 0.5 * (psi - 1j * dpsi / gamma) / e
    return complex(np.mean(amp_a)), complex(np.mean(amp_b))


def scattering_matrix(gamma: float, kind, branch, profile: PotentialProfile,
                      method: str = "dirac", closure: str = "balance", h: float | None = None,
                      fit_points: int = 8, fit_width: float = 1.0, free_tolerance: float = 1e-2,
                      backend: str | None = None) -> ScatterRecord:
    """Scattering coefficient from -inf back to -inf of the bounded solution.

    A and B are extracted from (psi, psi') at ``fit_points`` equally spaced u
    in [u_min, u_min + fit_width] and averaged separately. At gamma = 0 the
    free solution is c1 + c2 u and S is +1 (c2 = 0) or -1 (c2 != 0).
    """
    kind = KernelKind.parse(kind)
    branch = _branch(branch)
    gamma = float(gamma)
    if method not in ("dirac", "schrodinger"):
        raise ValueError(f"unknown method {method!r}")
    u0 = profile.u_min
    probe = np.linspace(u0, min(u0 + 2.0, profile.u_max), 21)
    v_free = float(np.max(np.abs(profile.v_at(probe, branch))))
    if gamma != 0.0 and v_free >= free_tolerance * gamma * gamma:
        raise ValueError(f"no free region for gamma={gamma}: |V| = {v_free:.2e} near u_min")

    if gamma == 0.0 and branch == "B":
        method = "schrodinger"
    if method == "dirac":
        st = dirac_integrate(gamma, kind, profile, h=h, closure=closure, backend=backend)
        da, db = st.derivatives(profile)
        u = st.u
        psi, dpsi = (st.alpha, da) if branch == "A" else (st.beta, db)
    else:
        vf = lambda x: profile.v_at(x, branch)  # noqa: E731
        level = free_tolerance * gamma * gamma if gamma else 1e-3
        st = schrodinger_bounded(gamma, vf, profile.u, h=h, free_level=level, backend=backend)
        u, psi, dpsi = st.u, st.psi, st.dpsi

    idx = _fit_indices(u, u0, fit_width, fit_points)
    uf, pf, dpf = u[idx], psi[idx], dpsi[idx]
    scale = float(np.max(np.abs(psi[: idx[-1] + 1])))
    if gamma == 0.0:
        c2, c1 = np.polyfit(uf, pf, 1)
        S = complex(1.0 if abs(c2) <= 1e-3 * abs(c1) else -1.0)
        amplitude = abs(c1) / scale
    else:
        amp_a, amp_b = _free_wave_coefficients(uf, pf, dpf, gamma)
        amplitude = abs(amp_a) / scale
        if amplitude < 1e-12:
            raise ArithmeticError(f"degenerate fit at gamma={gamma}: |A| vanishes")
        S = amp_b / amp_a
    ref = scattering_reference(gamma, kind, branch)
    err = abs(cmath.phase(S * ref.conjugate()))
    return ScatterRecord(gamma, kind, branch, S, ref, err, amplitude, tuple(float(x) for x in uf), method)


# ---------------------------------------------------------------- Jost solution

def jost_solution(gamma: float, u: Sequence[float], nodes: int | None = None, precision="auto") -> np.ndarray:
    """J(u) = e^{-i gamma u} - e^{u/2} I(e^u, 1/2 + i gamma) for the cosine kernel."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty(u.shape, dtype=complex)
    for i, x in enumerate(u):
        a = math.exp(float(x))
        sol = solve_phi(a, "cos", 1, nodes, precision)
        out[i] = cmath.exp(-1j * gamma * x) - math.exp(0.5 * x) * jost_integral(a, gamma, sol=sol)
    return out


@dataclass(frozen=True)
class JostReport:
    gamma: float
    ode_residual: float
    u_probe: float
    approach: float
    S_jost: complex
    S_ode: complex

    @property
    def s_difference(self) -> float:
        return abs(self.S_jost - self.S_ode)


def jost_verify(gamma: float, profile: PotentialProfile, grid=None,
                u_range: tuple[float, float] = (-6.0, 0.5), u_probe: float = -8.0,
                fit_range: tuple[float, float] = (-6.0, -2.0), fit_samples: int = 41,
                closure: str = "balance") -> JostReport:
    """(i) Schrodinger residual of J against branch A on the profile grid within
    ``u_range``; (ii) |J(u_probe) - e^{-i gamma u_probe}|; (iii) S from the
    decomposition of the bounded solution as c J + conj(c J), i.e. S = conj(c)/c,
    compared with the free-region extraction of ``scattering_matrix``.
    """
    if profile.kind is not KernelKind.COSINE:
        raise ValueError("the Jost representation is available for the cosine kernel only")
    gamma = float(gamma)
    if gamma == 0.0:
        raise ValueError("gamma must be non-zero")
    sel = (profile.u >= u_range[0] - 1e-12) & (profile.u <= u_range[1] + 1e-12)
    u = profile.u[sel]
    if u.size < 9:
        raise ValueError("u_range holds too few profile points")
    J = jost_solution(gamma, u, grid)
    residual = schrodinger_residual(J, profile.v_plus[sel], gamma, profile.du)
    probe = complex(jost_solution(gamma, [u_probe], grid)[0])
    approach = abs(probe - cmath.exp(-1j * gamma * u_probe))

    if fit_range[0] < profile.u_min:
        raise ValueError("fit range extends below the profile window")
    st = dirac_integrate(gamma, "cos", profile, closure=closure)
    idx = _fit_indices(st.u, fit_range[0], fit_range[1] - fit_range[0], fit_samples)
    uf = st.u[idx]
    Jf = jost_solution(gamma, uf, grid)
    design = np.column_stack([2.0 * Jf.real, -2.0 * Jf.imag])
    coef, *_ = np.linalg.lstsq(design, st.alpha[idx], rcond=None)
    c = complex(coef[0], coef[1])
    S_jost = c.conjugate() / c
    S_ode = scattering_matrix(gamma, "cos", "A", profile, closure=closure).S
    return JostReport(gamma, residual, float(u_probe), approach, S_jost, S_ode)


# ---------------------------------------------------------------- asymptotics

@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares fit of a log-determinant against a named basis in s."""

    kind: str
    basis: tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    condition: float
    s: np.ndarray
    log_d: np.ndarray

    def __getitem__(self, name: str) -> float:
        return float(self.coefficients[self.basis.index(name)])

    def stderr(self, name: str) -> float:
        i = self.basis.index(name)
        return float(math.sqrt(max(self.covariance[i, i], 0.0)))

    def as_dict(self) -> dict[str, float]:
        return {b: float(c) for b, c in zip(self.basis, self.coefficients)}


_BASIS = {
    "c2": lambda s: s * s,
    "c1": lambda s: s,
    "clog": np.log,
    "c0": np.ones_like,
}


def _log_d_samples(kind: KernelKind, s: np.ndarray, nodes, precision) -> np.ndarray:
    out = np.empty_like(s)
    for i, x in enumerate(s):
        a = math.sqrt(x / (2.0 * math.pi))
        ev = _nystrom.evaluate_auto(a, kind.value, nodes, precision)
        out[i] = ev.log_det_plus + ev.log_det_minus
    return out


def _lstsq_fit(label: str, names: list[str], s: np.ndarray, y: np.ndarray, corrections: int) -> AsymptoticFit:
    cols = [_BASIS[nm](s) for nm in names]
    for k in range(1, corrections + 1):
        names.append(f"c_inv{k}")
        cols.append(s ** (-k))
    x = np.column_stack(cols)
    # column equilibration keeps the reported condition number meaningful
    norms = np.linalg.norm(x, axis=0)
    cond = float(np.linalg.cond(x / norms))
    if cond > 1e12 or x.shape[0] <= x.shape[1]:
        raise ValueError(f"ill-conditioned design (cond={cond:.2e}); widen the s range")
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ coef
    dof = x.shape[0] - x.shape[1]
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(x.T @ x)
    return AsymptoticFit(label, tuple(names), coef, cov, float(np.linalg.norm(resid)), cond, s, y)


def _s_samples(s_range, points) -> np.ndarray:
    lo, hi = map(float, s_range)
    if not (2.0 <= lo < hi <= 12.0):
        raise ValueError("s range must satisfy 2 <= s_min < s_max <= 12")
    if points < 12:
        raise ValueError("need at least 12 sample points")
    return np.linspace(lo, hi, int(points))


def asymptotic_fit(kind, s_range=(3.0, 10.0), points: int = 15, corrections: int = 1,
                   nodes: int | None = None, precision="auto") -> AsymptoticFit:
    """Fit log D(s) = c2 s^2 + c1 s + clog log s + c0 [+ sum_k c_invk s^-k].

    ``corrections`` adds that many inverse powers of s to absorb the o(1)
    remainder; with ``corrections=0`` the fit uses exactly the four leading terms.
    """
    kind = KernelKind.parse(kind)
    s = _s_samples(s_range, points)
    y = _log_d_samples(kind, s, nodes, precision)
    return _lstsq_fit(kind.value, ["c2", "c1", "clog", "c0"], s, y, corrections)


def product_fit(s_range=(3.0, 10.0), points: int = 15, corrections: int = 1,
                nodes: int | None = None, precision="auto") -> AsymptoticFit:
    """Fit log D_+(s) + log D_-(s) against s^2, log s, 1 (the linear terms cancel)."""
    s = _s_samples(s_range, points)
    y = _log_d_samples(KernelKind.COSINE, s, nodes, precision) + _log_d_samples(KernelKind.SINE, s, nodes, precision)
    return _lstsq_fit("product", ["c2", "clog", "c0"], s, y, corrections)


# ---------------------------------------------------------------- zeros

@dataclass(frozen=True, eq=False)
class ZeroScan:
    u_fixed: float
    kind: KernelKind
    gammas: np.ndarray
    values: np.ndarray
    zeros: np.ndarray
    coarse: bool

    @property
    def count(self) -> int:
        return int(self.zeros.size)

    def signed(self) -> np.ndarray:
        """Zeros at +gamma and -gamma (alpha is even in gamma)."""
        return np.concatenate([-self.zeros[::-1], self.zeros])


def structure_zeros(u_fixed: float, gamma_max: float, kind, profile: PotentialProfile,
                    dgamma: float = 0.1, closure: str = "balance", h: float | None = None,
                    tol: float = 1e-8, backend: str | None = None) -> ZeroScan:
    """Real zeros in (0, gamma_max] of gamma -> alpha(u_fixed; gamma).

    Sign changes on a uniform gamma scan are refined by Brent's method. The
    scan is flagged as coarse when two zeros fall within three scan steps.
    """
    kind = KernelKind.parse(kind)
    if not profile.u_min <= u_fixed < profile.u_max:
        raise ValueError("u_fixed outside the profile window")
    if not (gamma_max > 0 and dgamma > 0):
        raise ValueError("gamma_max and dgamma must be positive")

    def alpha(g: float) -> float:
        return float(dirac_integrate(g, kind, profile, h=h, u_stop=u_fixed, closure=closure,
                                     backend=backend).alpha[0])

    count = int(round(gamma_max / dgamma))
    gammas = np.linspace(0.0, gamma_max, count + 1)
    values = np.array([alpha(g) for g in gammas])
    zeros = []
    for i in np.nonzero(np.sign(values[1:]) * np.sign(values[:-1]) < 0)[0]:
        zeros.append(brentq(alpha, gammas[i], gammas[i + 1], xtol=tol, rtol=1e-15))
    zeros = np.array(zeros)
    coarse = bool(zeros.size > 1 and np.min(np.diff(zeros)) < 3 * dgamma)
    if coarse:
        warnings.warn("gamma scan step too coarse: adjacent zeros closer than three steps",
                      RuntimeWarning, stacklevel=2)
    return ZeroScan(float(u_fixed), kind, gammas, values, zeros, coarse)


def free_zero_count(T: float, u_fixed: float, kind="cos") -> float:
    """Zero count of cos(gamma u - arg chi(gamma)/2) on (0, T].

    This is the count implied by the free-region asymptotics alpha ~ 2 Re(A e^{-i gamma u})
    with conj(A)/A = chi, ignoring the potential at u_fixed.
    """
    kind = KernelKind.parse(kind)
    phase = abs(T * u_fixed - 0.5 * chi_phase(T, kind.value))
    return phase / math.pi


# ---------------------------------------------------------------- second log-derivatives

@dataclass(frozen=True, eq=False)
class LogDerivativeResiduals:
    """Scaled residuals on a u grid:

    * ``log_d``: mu^2 + (log det(1 - D))''
    * ``plus``:  mu^2 - mu' + 2 (log det(1 + F))''
    * ``minus``: mu^2 + mu' + 2 (log det(1 - F))''

    each divided by max(1, |mu^2 -/+ mu'|) respectively mu^2.
    """

    kind: KernelKind
    u: np.ndarray
    mu: np.ndarray
    mu_prime: np.ndarray
    log_d: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    def max(self) -> dict[str, float]:
        return {"log_d": float(np.max(self.log_d)), "plus": float(np.max(self.plus)),
                "minus": float(np.max(self.minus))}


def log_derivative_residuals(kind, u_grid: Sequence[float], h: float = 0.005,
                          nodes: int | None = None, precision="auto") -> LogDerivativeResiduals:
    """mu' and the second derivatives in u come from local Richardson stencils;
    log det(1 - D) is computed independently as det(I - M^2)."""
    kind = KernelKind.parse(kind)
    u = np.asarray(u_grid, dtype=float)
    out = {k: np.empty_like(u) for k in ("mu", "mu_prime", "log_d", "plus", "minus")}
    for i, x in enumerate(u):
        a0 = math.exp(float(x))
        n = nodes if nodes is not None else _nystrom.default_nodes(a0)
        prec = _nystrom.resolve_precision(a0, precision)

        def ev(y):
            return _nystrom.evaluate(math.exp(y), kind.value, n, prec)

        def mu_u(y):
            e = ev(y)
            return math.exp(y) * (e.end_plus + e.end_minus)

        m = mu_u(float(x))
        mp = first_derivative(mu_u, float(x), h)
        ldd = second_derivative(lambda y: _nystrom.log_det_d(math.exp(y), kind.value, n, prec), float(x), h)
        lpp = second_derivative(lambda y: ev(y).log_det_plus, float(x), h)
        lmm = second_derivative(lambda y: ev(y).log_det_minus, float(x), h)
        vp, vm = m * m - mp, m * m + mp
        out["mu"][i] = m
        out["mu_prime"][i] = mp
        out["log_d"][i] = abs(m * m + ldd) / max(1.0, m * m)
        out["plus"][i] = abs(vp + 2.0 * lpp) / max(1.0, abs(vp))
        out["minus"][i] = abs(vm + 2.0 * lmm) / max(1.0, abs(vm))
    return LogDerivativeResiduals(kind, u, **out)
