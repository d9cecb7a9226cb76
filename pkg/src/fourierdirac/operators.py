"""Nystrom matrices of the truncated cosine/sine transforms and their Fredholm
determinants.

Operators act on L^2(0, 1) after the rescaling x = a t. The truncated cosine
transform has kernel ``2a cos(2 pi a^2 t tau)`` and the sine transform
``2a sin(2 pi a^2 t tau)``; their squares are the even/odd Dirichlet kernels
``sin(s(x-y))/(pi(x-y)) +/- sin(s(x+y))/(pi(x+y))`` with s = 2 pi a^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _nystrom
from .numerics import second_derivative
from .specfun import QuadratureGrid, gauss_legendre

__all__ = [
    "KernelKind",
    "DiscretizedOperator",
    "DeterminantRecord",
    "kernel_matrix",
    "fredholm_dets",
    "det_sweep",
    "dyson_potential",
    "dirichlet_kernel",
    "s_of_a",
    "a_of_s",
]


class KernelKind(str, Enum):
    COSINE = "cos"
    SINE = "sin"

    @classmethod
    def parse(cls, value) -> "KernelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"cos": cls.COSINE, "cosine": cls.COSINE, "+": cls.COSINE, "even": cls.COSINE,
                   "sin": cls.SINE, "sine": cls.SINE, "-": cls.SINE, "odd": cls.SINE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown kernel kind {value!r}; use 'cos' or 'sin'") from None

    @property
    def trig(self):
        return np.cos if self is KernelKind.COSINE else np.sin


def s_of_a(a: float) -> float:
    return 2.0 * math.pi * a * a


def a_of_s(s: float) -> float:
    return math.sqrt(s / (2.0 * math.pi))


def _as_grid(grid) -> QuadratureGrid:
    if grid is None:
        return gauss_legendre(64)
    if isinstance(grid, QuadratureGrid):
        return grid
    return gauss_legendre(int(grid))


def _check_a(a: float) -> float:
    a = float(a)
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError(f"a must be positive and finite, got {a!r}")
    return a


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Symmetrized Nystrom matrix M_ij = sqrt(w_i) K_a(t_i, t_j) sqrt(w_j)."""

    a: float
    kind: KernelKind
    grid: QuadratureGrid
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues())))

    def squared_kernel(self) -> np.ndarray:
        """(M^2)_ij / sqrt(w_i w_j), the quadrature image of the Dirichlet kernel."""
        sw = self.grid.sqrt_weights
        return (self.matrix @ self.matrix) / np.outer(sw, sw)


def kernel_matrix(a: float, kind, grid=None) -> DiscretizedOperator:
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    grid = _as_grid(grid)
    t = grid.nodes
    sw = grid.sqrt_weights
    k = 2.0 * a * kind.trig(s_of_a(a) * np.outer(t, t))
    m = sw[:, None] * k * sw[None, :]
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return DiscretizedOperator(a, kind, grid, m)


def dirichlet_kernel(s: float, kind, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """sin(s(x-y))/(pi(x-y)) +/- sin(s(x+y))/(pi(x+y)), with the diagonal limit."""
    kind = KernelKind.parse(kind)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    diff = x - y
    summ = x + y
    d = s / math.pi * np.sinc(s * diff / math.pi)
    e = s / math.pi * np.sinc(s * summ / math.pi)
    return d + e if kind is KernelKind.COSINE else d - e


@dataclass(frozen=True)
class DeterminantRecord:
    """Fredholm determinants det(1+F), det(1-F) and det(1-D) at one a."""

    a: float
    u: float
    kind: KernelKind
    det_plus: float
    det_minus: float
    det_d: float
    log_det_plus: float
    log_det_minus: float
    log_det_d: float
    n: int
    precision_bits: int

    @property
    def s(self) -> float:
        return s_of_a(self.a)

    @property
    def factorization_residual(self) -> float:
        """|det(1-D) - det(1+F) det(1-F)| / det(1-D), computed in log space."""
        return abs(math.expm1(self.log_det_plus + self.log_det_minus - self.log_det_d))

    def as_row(self) -> dict:
        return {
            "a": self.a,
            "u": self.u,
            "det_plus": self.det_plus,
            "det_minus": self.det_minus,
            "det_d": self.det_d,
            "log_det_plus": self.log_det_plus,
            "log_det_minus": self.log_det_minus,
            "log_det_d": self.log_det_d,
        }


def fredholm_dets(a: float, kind, grid=None, precision="auto") -> DeterminantRecord:
    """Determinants of I + M, I - M and I - M^2 by LU factorization.

    ``precision='auto'`` switches to multiprecision arithmetic once the
    largest eigenvalues of M come within ~exp(-5) of one.
    """
    a = _check_a(a)
    kind = KernelKind.parse(kind)
    grid = _as_grid(grid)
    prec = _nystrom.resolve_precision(a, precision)
    ev = _nystrom.evaluate(a, kind.value, grid.n, prec)
    ldd = _nystrom.log_det_d(a, kind.value, grid.n, prec)
    values = (ev.log_det_plus, ev.log_det_minus, ldd)
    if not all(math.isfinite(v) for v in values):
        raise FloatingPointError(f"non-finite determinant at a={a}")
    return DeterminantRecord(
        a=a,
        u=math.log(a),
        kind=kind,
        det_plus=math.exp(ev.log_det_plus),
        det_minus=math.exp(ev.log_det_minus),
        det_d=math.exp(ldd),
        log_det_plus=ev.log_det_plus,
        log_det_minus=ev.log_det_minus,
        log_det_d=ldd,
        n=grid.n,
        precision_bits=prec or 53,
    )


def det_sweep(a_list: Sequence[float], kind, n: int = 64, precision="auto",
              check_monotone: bool = True) -> list[DeterminantRecord]:
    """One record per a; a_list must be non-empty and strictly increasing."""
    a_arr = np.asarray(list(a_list), dtype=float)
    if a_arr.size == 0:
        raise ValueError("a_list is empty")
    if np.any(np.diff(a_arr) <= 0):
        raise ValueError("a_list must be strictly increasing")
    grid = gauss_legendre(int(n))
    records = [fredholm_dets(float(a), kind, grid, precision) for a in a_arr]
    if check_monotone:
        logs = np.array([r.log_det_d for r in records])
        if np.any(np.diff(logs) > 1e-12 * np.maximum(1.0, np.abs(logs[1:]))):
            raise ArithmeticError("det(1 - D) increased along the sweep")
    return records


def _log_d_of_s(s: float, kind: KernelKind, n, precision) -> float:
    a = a_of_s(s)
    grid = _as_grid(n if n is not None else _nystrom.default_nodes(a))
    prec = _nystrom.resolve_precision(a, precision)
    ev = _nystrom.evaluate(a, kind.value, grid.n, prec)
    return ev.log_det_plus + ev.log_det_minus


def dyson_potential(s_grid: Sequence[float], kind, n=None, precision="auto") -> tuple[np.ndarray, np.ndarray]:
    """W(s) = -2 d^2/ds^2 log D(s) - 1 on a uniform s grid.

    ``kind='cos'`` gives the even kernel D_+, ``'sin'`` the odd kernel D_-.
    The second derivative uses 4th-order centred stencils at spacing h and 2h
    combined by one Richardson step, evaluated off-grid where needed.
    """
    kind = KernelKind.parse(kind)
    s = np.asarray(list(s_grid), dtype=float)
    if s.size < 5:
        raise ValueError("need at least 5 grid points for the stencil")
    h = np.diff(s)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * max(1.0, abs(h[0])):
        raise ValueError("s grid must be uniform and increasing")
    if s[0] <= 0:
        raise ValueError("s grid must be positive")
    step = min(float(h[0]), 0.2 * float(s[0]))
    w = np.array([
        -2.0 * second_derivative(lambda x: _log_d_of_s(x, kind, n, precision), float(x), step) - 1.0
        for x in s
    ])
    return s, w
