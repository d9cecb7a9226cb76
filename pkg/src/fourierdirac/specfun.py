"""Quadrature rules and the complex special functions used on the critical line.

Everything here is a pure function of its arguments. The log-Gamma routine is a
self-contained Stirling/recurrence/reflection implementation so the scattering
references do not depend on the version of an external special-function library.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureGrid",
    "CriticalPoint",
    "gauss_legendre",
    "log_gamma",
    "chi_plus",
    "chi_minus",
    "chi_phase",
    "spectral_density",
]

LOG_PI = math.log(math.pi)
LOG_2PI = math.log(2.0 * math.pi)

# B_{2k} / (2k (2k-1)), k = 1..13
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    77683.0 / 5796.0,
    -236364091.0 / 1506960.0,
    657931.0 / 300.0,
)
_STIRLING_MIN_ABS = 12.0


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Gauss-Legendre rule on [0, 1].

    ``nodes`` are strictly increasing in (0, 1) and ``weights`` sum to one.
    Arrays are made read-only so a grid can be shared between workers.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    digest: str = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.nodes, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
        object.__setattr__(self, "digest", h.hexdigest()[:16])

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class CriticalPoint:
    """A point s = 1/2 + i*gamma on the critical line."""

    gamma: float

    @property
    def s(self) -> complex:
        return complex(0.5, self.gamma)


def _legendre_with_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> QuadratureGrid:
    """Gauss-Legendre nodes and weights for [0, 1] with ``n`` points.

    Nodes are Newton-refined roots of P_n on [-1, 1] started from Tricomi's
    asymptotic guesses, then mapped affinely onto [0, 1].
    """
    if int(n) != n or n < 2:
        raise ValueError(f"need an integer node count n >= 2, got {n!r}")
    n = int(n)
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5)) * (1.0 - (n - 1) / (8.0 * n**3))
    for _ in range(100):
        p, dp = _legendre_with_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:  # pragma: no cover - Newton converges in a handful of steps
        raise RuntimeError("Legendre Newton iteration did not converge")
    _, dp = _legendre_with_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize to remove the last bit of Newton noise
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureGrid(n, 0.5 * (x + 1.0), 0.5 * w)


def _log_gamma_stirling(z: complex) -> complex:
    zinv = 1.0 / z
    zinv2 = zinv * zinv
    series = 0.0j
    for c in reversed(_STIRLING):
        series = series * zinv2 + c
    return (z - 0.5) * cmath.log(z) - z + 0.5 * LOG_2PI + series * zinv


def _log_gamma_right(z: complex) -> complex:
    # principal branch for Re z >= 1/2: shift upward, each log(z + k) is principal
    shift = 0.0j
    while abs(z) < _STIRLING_MIN_ABS:
        shift += cmath.log(z)
        z += 1.0
    return _log_gamma_stirling(z) - shift


def _log_sin_pi(z: complex) -> complex:
    # principal log of sin(pi z), stable for large |Im z|
    w = math.pi * z
    if abs(z.imag) < 5.0:
        # reduce by the nearest integer first so sin stays accurate next to the poles
        k = round(z.real)
        val = cmath.sin(math.pi * complex(z.real - k, z.imag))
        if k % 2:
            val = -val
        if z.imag == 0.0 and val.real < 0.0:
            # on the real axis take the limit from Im z > 0; d/dz sin has sign (-1)^k
            return complex(math.log(-val.real), -math.pi if k % 2 else math.pi)
        return cmath.log(complex(val.real, val.imag + 0.0))
    if z.imag > 0:
        val = -1j * w + cmath.log(1.0 - cmath.exp(2j * w)) + cmath.log(0.5j)
    else:
        val = 1j * w + cmath.log(1.0 - cmath.exp(-2j * w)) + cmath.log(-0.5j)
    im = math.remainder(val.imag, 2.0 * math.pi)
    if im == -math.pi:
        im = math.pi
    return complex(val.real, im)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z).

    Stirling series with upward recurrence for |z| < 12 and the reflection
    formula for Re z < 1/2. Conjugate symmetry holds exactly.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise ValueError(f"log_gamma has a pole at {z.real}")
    if z.imag == 0.0:
        z = complex(z.real, 0.0)  # treat -0.0 like +0.0 on the real axis
    if z.imag < 0.0:
        return log_gamma(z.conjugate()).conjugate()
    if z.real >= 0.5:
        return _log_gamma_right(z)
    if abs(z) < 0.25:
        # next to the pole at 0 pi*z loses relative precision (subnormals)
        return _log_gamma_right(1.0 + z) - cmath.log(z)
    branch = math.copysign(2.0 * math.pi, z.imag) * math.floor(0.5 * z.real + 0.25)
    return complex(LOG_PI, branch) - _log_sin_pi(z) - _log_gamma_right(1.0 - z)


def chi_phase(gamma: float, kind: str = "cos") -> float:
    """Continuous phase of chi_+ (``kind='cos'``) or chi_- (``kind='sin'``)."""
    gamma = float(gamma)
    if kind in ("cos", "cosine", "+"):
        return gamma * LOG_PI - 2.0 * log_gamma(complex(0.25, 0.5 * gamma)).imag
    if kind in ("sin", "sine", "-"):
        return gamma * LOG_PI - 2.0 * log_gamma(complex(0.75, 0.5 * gamma)).imag
    raise ValueError(f"unknown kind {kind!r}")


def chi_plus(gamma: float) -> complex:
    """pi^(s-1/2) Gamma((1-s)/2) / Gamma(s/2) at s = 1/2 + i*gamma."""
    return cmath.exp(1j * chi_phase(gamma, "cos"))


def chi_minus(gamma: float) -> complex:
    """pi^(s-1/2) Gamma((2-s)/2) / Gamma((1+s)/2) at s = 1/2 + i*gamma."""
    return cmath.exp(1j * chi_phase(gamma, "sin"))


def spectral_density(gamma: float) -> float:
    """Density of d Delta(gamma) = |pi^(-s/2) Gamma(s/2)|^(-2) |ds| / (2 pi)."""
    s = complex(0.5, float(gamma))
    log_abs = -0.5 * s.real * LOG_PI + log_gamma(0.5 * s).real
    return math.exp(-2.0 * log_abs) / (2.0 * math.pi)
