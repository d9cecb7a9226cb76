"""Finite-difference helpers shared by the residual checks."""

from __future__ import annotations

from typing import Callable

import numpy as np

_D1_6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_D2_6 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0


def _d1(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def _d2(f, x, h):
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)


def first_derivative(f: Callable[[float], float], x: float, h: float, richardson: bool = True):
    """Centred 4th-order difference; with ``richardson`` the h/2h pair is
    extrapolated to 6th order."""
    d = _d1(f, x, h)
    if not richardson:
        return d
    return (16.0 * d - _d1(f, x, 2 * h)) / 15.0


def second_derivative(f: Callable[[float], float], x: float, h: float, richardson: bool = True):
    d = _d2(f, x, h)
    if not richardson:
        return d
    return (16.0 * d - _d2(f, x, 2 * h)) / 15.0


def grid_derivative(y: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """6th-order centred derivative of uniform samples (axis 0).

    The result has three fewer points at each end than ``y``.
    """
    y = np.asarray(y)
    coef = _D1_6 if order == 1 else _D2_6
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if y.shape[0] < 7:
        raise ValueError("need at least 7 samples")
    m = y.shape[0] - 6
    out = sum(c * y[k:k + m] for k, c in enumerate(coef))
    return out / (h if order == 1 else h * h)


def schrodinger_residual(psi: np.ndarray, potential: np.ndarray, gamma: float, h: float,
                         window: float = 1.0) -> float:
    """Scaled residual of -psi'' + V psi = gamma^2 psi on uniform samples.

    Each pointwise residual is divided by the largest of |psi''| + |(V-gamma^2) psi|
    within ``window`` of that point, so exponentially growing or decaying
    stretches are judged against their own scale.
    """
    psi = np.asarray(psi)
    v = np.asarray(potential, dtype=float)[3:-3]
    d2 = grid_derivative(psi, h, 2)
    core = psi[3:-3]
    res = np.abs(-d2 + (v - gamma * gamma) * core)
    scale = np.abs(d2) + np.abs((v - gamma * gamma) * core)
    half = max(1, int(round(window / h)))
    padded = np.pad(scale, half, mode="edge")
    from numpy.lib.stride_tricks import sliding_window_view

    local = sliding_window_view(padded, 2 * half + 1).max(axis=1)
    return float(np.max(res / local))
