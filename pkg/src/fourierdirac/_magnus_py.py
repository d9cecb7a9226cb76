"""Pure-Python fourth-order Magnus propagation (reference and fallback)."""

from __future__ import annotations

import numpy as np

_SQRT3_12 = np.sqrt(3.0) / 12.0


def step_matrices(p1, q1, r1, p2, q2, r2, h: float) -> np.ndarray:
    """exp(Omega_k) for every step, shape (N, 2, 2).

    Coefficients describe traceless matrices [[p, q], [r, -p]] at the two
    Gauss points of each step.
    """
    p1, q1, r1, p2, q2, r2 = (np.asarray(x, dtype=float) for x in (p1, q1, r1, p2, q2, r2))
    cp = q2 * r1 - q1 * r2
    cq = 2.0 * (p2 * q1 - q2 * p1)
    cr = 2.0 * (r2 * p1 - p2 * r1)
    hh = _SQRT3_12 * h * h
    big_p = 0.5 * h * (p1 + p2) + hh * cp
    big_q = 0.5 * h * (q1 + q2) + hh * cq
    big_r = 0.5 * h * (r1 + r2) + hh * cr
    q2sq = big_p * big_p + big_q * big_r
    w = np.sqrt(np.abs(q2sq))
    small = np.abs(q2sq) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(q2sq > 0, np.cosh(w), np.cos(w))
        sh = np.where(q2sq > 0, np.sinh(w), np.sin(w)) / w
    c = np.where(small, 1.0 + q2sq * (0.5 + q2sq / 24.0), c)
    sh = np.where(small, 1.0 + q2sq * (1.0 / 6.0 + q2sq / 120.0), sh)
    out = np.empty(p1.shape + (2, 2))
    out[:, 0, 0] = c + sh * big_p
    out[:, 0, 1] = sh * big_q
    out[:, 1, 0] = sh * big_r
    out[:, 1, 1] = c - sh * big_p
    return out


def propagate(p1, q1, r1, p2, q2, r2, h: float, y0: float, y1: float) -> np.ndarray:
    """Apply N Magnus steps; returns the (N + 1, 2) trajectory."""
    n = len(p1)
    if not all(len(x) == n for x in (q1, r1, p2, q2, r2)):
        raise ValueError("coefficient arrays must have equal length")
    mats = step_matrices(p1, q1, r1, p2, q2, r2, h).tolist()
    out = np.empty((n + 1, 2))
    a, b = float(y0), float(y1)
    out[0] = a, b
    for k, ((m00, m01), (m10, m11)) in enumerate(mats, start=1):
        a, b = m00 * a + m01 * b, m10 * a + m11 * b
        out[k, 0] = a
        out[k, 1] = b
    return out
