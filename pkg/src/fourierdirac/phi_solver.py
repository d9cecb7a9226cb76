"""Solutions of the second-kind equations g +/- F g = 2 cos (or 2 sin) and the
quantities built from them.

All functions are represented on [0, 1] through x = a t. A solution sampled at
the Gauss nodes extends to every t >= 0 through the Nystrom formula
``g(t) = rhs(t) -/+ sum_j w_j K(t, t_j) g_j``, which is the integral equation
itself and therefore exact for the discretized problem.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _nystrom
from .numerics import first_derivative
from .operators import KernelKind, _as_grid, _check_a, s_of_a
from .specfun import QuadratureGrid, gauss_legendre

__all__ = [
    "PhiSolution",
    "MuValue",
    "IdentityResiduals",
    "PhisysResiduals",
    "solve_phi",
    "phi_eval",
    "phi_euler",
    "mu",
    "identity_residuals",
    "phisys_residual",
    "jost_integral",
    "parse_sign",
]


def parse_sign(sign) -> int:
    if sign in (1, "+", "plus", "+1"):
        return 1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def _grid_for(a: float, grid) -> QuadratureGrid:
    if grid is None:
        return gauss_legendre(_nystrom.default_nodes(a))
    return _as_grid(grid)


@dataclass(frozen=True, eq=False)
class PhiSolution:
    """Solution of g + sign * F_a g = rhs sampled at the Gauss nodes."""

    a: float
    kind: KernelKind
    sign: int
    grid: QuadratureGrid
    values: np.ndarray
    endpoint: float
    precision_bits: int = 53
    _weighted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_weighted", self.grid.weights * self.values)

    @property
    def s(self) -> float:
        return s_of_a(self.a)

    def rhs(self, t) -> np.ndarray:
        return 2.0 * self.kind.trig(self.s * np.asarray(t, dtype=float))

    def residual(self) -> float:
        """max |(I + sign M_w) g - rhs| of the unsymmetrized Nystrom system."""
        t = self.grid.nodes
        k = 2.0 * self.a * self.kind.trig(self.s * np.outer(t, t))
        return float(np.max(np.abs(self.values + self.sign * (k @ self._weighted) - self.rhs(t))))

    @property
    def physical_endpoint(self) -> float:
        """phi(a) in the original variable; identical to ``endpoint``."""
        return self.endpoint


def solve_phi(a: float, kind, sign, grid=None, precision="auto") -> PhiSolution:
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    sign = parse_sign(sign)
    grid = _grid_for(a, grid)
    prec = _nystrom.resolve_precision(a, precision)
    ev = _nystrom.evaluate(a, kind.value, grid.n, prec)
    return PhiSolution(a, kind, sign, grid, ev.g(sign), ev.end(sign), prec or 53)


def phi_eval(sol: PhiSolution, t):
    """Nystrom extension of the solution to t >= 0 (physical point x = a t)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    nodes = sol.grid.nodes
    k = 2.0 * sol.a * sol.kind.trig(sol.s * np.multiply.outer(t_arr, nodes))
    out = sol.rhs(t_arr) - sol.sign * (k @ sol._weighted)
    idx = np.searchsorted(nodes, t_arr)
    idx = np.clip(idx, 0, nodes.size - 1)
    hit = nodes[idx] == t_arr
    out[hit] = sol.values[idx[hit]]
    return out if np.ndim(t) else float(out[0])


def phi_euler(sol: PhiSolution, t):
    """t d/dt of the Nystrom extension, i.e. x d/dx of phi at x = a t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    nodes = sol.grid.nodes
    s = sol.s
    arg = s * np.multiply.outer(t_arr, nodes)
    if sol.kind is KernelKind.COSINE:
        dk = -2.0 * sol.a * s * np.sin(arg) * nodes
        drhs = -2.0 * s * np.sin(s * t_arr)
    else:
        dk = 2.0 * sol.a * s * np.cos(arg) * nodes
        drhs = 2.0 * s * np.cos(s * t_arr)
    out = t_arr * (drhs - sol.sign * (dk @ sol._weighted))
    return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class MuValue:
    a: float
    u: float
    kind: KernelKind
    mu: float


def mu(a: float, kind, grid=None, precision="auto") -> MuValue:
    """mu(a) = a (phi^+(a) + phi^-(a)), or the sine analogue with psi^+/-."""
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    grid = _grid_for(a, grid)
    ev = _nystrom.evaluate(a, kind.value, grid.n, _nystrom.resolve_precision(a, precision))
    return MuValue(a, math.log(a), kind, a * (ev.end_plus + ev.end_minus))


def _scaled(diff: float, ref: float) -> float:
    return abs(diff) / max(1.0, abs(ref))


@dataclass(frozen=True)
class IdentityResiduals:
    """Scaled residuals |lhs - rhs| / max(1, |rhs|) of the determinant identities."""

    a: float
    kind: KernelKind
    endpoint_plus: float
    endpoint_minus: float
    mu_log_ratio: float
    log_det_derivative: float
    mu_squared: float

    def as_dict(self) -> dict[str, float]:
        return {
            "endpoint_plus": self.endpoint_plus,
            "endpoint_minus": self.endpoint_minus,
            "mu_log_ratio": self.mu_log_ratio,
            "log_det_derivative": self.log_det_derivative,
            "mu_squared": self.mu_squared,
        }

    def max(self) -> float:
        return max(self.as_dict().values())


def _stencil_eval(a: float, kind: KernelKind, n: int, prec):
    return _nystrom.evaluate(float(a), kind.value, n, prec)


def identity_residuals(a: float, kind, grid=None, h: float | None = None,
                       precision="auto") -> IdentityResiduals:
    """Check endpoint/determinant identities against Richardson differences in a.

    * phi^+(a) = d/da log det(1 + F),  phi^-(a) = -d/da log det(1 - F)
    * mu(a) = a d/da log(det(1 + F) / det(1 - F))
    * d/da log det(1 - D) = -2a int_0^1 g^+ g^- dt   (the integral over [-a, a])
    * mu(a)^2 = a d/da [a * 2a int_0^1 g^+ g^- dt]
    """
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    grid = _grid_for(a, grid)
    n = grid.n
    prec = _nystrom.resolve_precision(a, precision)
    if h is None:
        h = 1e-3 * max(1.0, a)
    ev = _stencil_eval(a, kind, n, prec)
    w = grid.weights

    def lp(x):
        return _stencil_eval(x, kind, n, prec).log_det_plus

    def lm(x):
        return _stencil_eval(x, kind, n, prec).log_det_minus

    def pair_integral(x):
        e = _stencil_eval(x, kind, n, prec)
        return 2.0 * x * float(np.dot(w, e.g_plus * e.g_minus))

    d_lp = first_derivative(lp, a, h)
    d_lm = first_derivative(lm, a, h)
    mu_val = a * (ev.end_plus + ev.end_minus)
    d_ld = d_lp + d_lm
    d_a_pair = first_derivative(lambda x: x * pair_integral(x), a, h)
    return IdentityResiduals(
        a=a,
        kind=kind,
        endpoint_plus=_scaled(ev.end_plus - d_lp, d_lp),
        endpoint_minus=_scaled(ev.end_minus + d_lm, d_lm),
        mu_log_ratio=_scaled(mu_val - a * (d_lp - d_lm), mu_val),
        log_det_derivative=_scaled(d_ld + pair_integral(a), d_ld),
        mu_squared=_scaled(mu_val**2 - a * d_a_pair, mu_val**2),
    )


@dataclass(frozen=True)
class PhisysResiduals:
    """Max-norm residuals of the (a, x) differential system at the nodes,
    scaled by max(1, max|g|)."""

    a: float
    kind: KernelKind
    plus: float
    minus: float
    consequence: float

    def max(self) -> float:
        return max(self.plus, self.minus, self.consequence)


def phisys_residual(a: float, grid=None, kind="cos", h: float | None = None,
                    precision="auto") -> PhisysResiduals:
    """Residuals of

        a d/da phi+ = delta phi- - (1/2 + mu) phi+
        a d/da phi- = delta phi+ - (1/2 - mu) phi-

    with delta = x d/dx + 1/2, plus the pointwise consequence
    d/da [a phi+ phi-] = 1/2 d/dx [x (phi+^2 + phi-^2)].
    """
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    grid = _grid_for(a, grid)
    n = grid.n
    prec = _nystrom.resolve_precision(a, precision)
    if h is None:
        h = 1e-3 * max(1.0, a)
    t = grid.nodes
    plus = solve_phi(a, kind, 1, grid, prec or "double")
    minus = solve_phi(a, kind, -1, grid, prec or "double")
    gp, gm = plus.values, minus.values
    mu_val = a * (plus.endpoint + minus.endpoint)

    # a d/da at fixed physical x equals a d/da at fixed t minus t d/dt
    da_p = a * np.array(first_derivative(lambda x: _stencil_eval(x, kind, n, prec).g_plus, a, h))
    da_m = a * np.array(first_derivative(lambda x: _stencil_eval(x, kind, n, prec).g_minus, a, h))
    ep = phi_euler(plus, t)
    em = phi_euler(minus, t)
    adp = da_p - ep
    adm = da_m - em
    r_plus = adp - (em + 0.5 * gm) + (0.5 + mu_val) * gp
    r_minus = adm - (ep + 0.5 * gp) + (0.5 - mu_val) * gm
    # consequence: d/da[a phi+ phi-] = phi+ phi- + phi- (a d/da phi+) + phi+ (a d/da phi-)
    lhs = gp * gm + gm * adp + gp * adm
    rhs = 0.5 * (gp**2 + gm**2) + gp * ep + gm * em
    scale = max(1.0, float(np.max(np.abs(gp))), float(np.max(np.abs(gm))))
    return PhisysResiduals(
        a=a,
        kind=kind,
        plus=float(np.max(np.abs(r_plus))) / scale,
        minus=float(np.max(np.abs(r_minus))) / scale,
        consequence=float(np.max(np.abs(lhs - rhs))) / scale**2,
    )


def _panel_rule(length: float, panel: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    npanel = max(1, math.ceil(length / panel))
    edges = np.linspace(0.0, length, npanel + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def jost_integral(a: float, gamma: float, grid=None, precision="auto",
                  sol: PhiSolution | None = None) -> complex:
    """I(a, s) = int_0^a phi_a^+(x) x^(-s) dx at s = 1/2 + i gamma.

    With x = a t and t = exp(-w) the integrand becomes
    (g(e^-w) - g(0)) e^{-(1-s) w}, which decays like e^{-5w/2}; the subtracted
    constant integrates to g(0)/(1-s) exactly. The w-axis is covered by
    Gauss-Legendre panels short enough to resolve the e^{i gamma w} oscillation.
    """
    a = _check_a(a)
    if sol is None:
        sol = solve_phi(a, "cos", 1, grid, precision)
    s = complex(0.5, float(gamma))
    one_minus_s = 1.0 - s
    g0 = phi_eval(sol, 0.0)
    length = 40.0
    panel = min(1.0, 2.0 / max(abs(gamma), 1e-12))
    w_nodes, w_weights = _panel_rule(length, panel)
    tt = np.exp(-w_nodes)
    vals = (phi_eval(sol, tt) - g0) * np.exp(-one_minus_s * w_nodes)
    integral = g0 / one_minus_s + complex(np.dot(w_weights, vals))
    return cmath.exp(one_minus_s * math.log(a)) * integral
