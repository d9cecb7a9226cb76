"""Fourth-order Magnus integrator for y' = A(u) y with traceless 2x2 A.

The two-point Gauss rule gives Omega = h/2 (A1 + A2) + sqrt(3) h^2/12 [A2, A1],
and exp(Omega) = cosh(q) I + sinh(q)/q Omega with q^2 = -det(Omega). Every step
has unit determinant, so Wronskians are conserved to rounding.

The compiled kernel is used when available; setting ``FOURIERDIRAC_PURE_PYTHON=1``
forces the NumPy fallback.
"""

from __future__ import annotations

import os
from typing import Callable

import numpy as np

from . import _magnus_py

GAUSS_OFFSETS = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)

_force_python = os.environ.get("FOURIERDIRAC_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes")
try:
    if _force_python:
        raise ImportError("pure-Python backend requested")
    from . import _magnus_core as _backend
    BACKEND = "cython"
except ImportError:
    _backend = _magnus_py
    BACKEND = "python"

__all__ = ["BACKEND", "GAUSS_OFFSETS", "propagate", "integrate"]


def propagate(p1, q1, r1, p2, q2, r2, h: float, y0, backend: str | None = None) -> np.ndarray:
    """Low-level entry point on precomputed Gauss-point coefficients."""
    mod = _backend
    if backend == "python":
        mod = _magnus_py
    elif backend == "cython":
        from . import _magnus_core as mod
    elif backend is not None:
        raise ValueError(f"unknown backend {backend!r}")
    arrays = [np.ascontiguousarray(x, dtype=np.float64) for x in (p1, q1, r1, p2, q2, r2)]
    return mod.propagate(*arrays, float(h), float(y0[0]), float(y0[1]))


def integrate(coefficients: Callable[[np.ndarray], tuple], u_start: float, u_stop: float,
              h: float | None, y0, backend: str | None = None,
              steps: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Integrate from ``u_start`` to ``u_stop`` with uniform steps of size about |h|
    (or exactly ``steps`` steps).

    ``coefficients(u)`` returns the (p, q, r) arrays of A(u) = [[p, q], [r, -p]].
    Returns the step points and the (N + 1, 2) trajectory, in integration order.
    """
    span = u_stop - u_start
    if steps is not None:
        nsteps = int(steps)
        if nsteps < 1:
            raise ValueError("steps must be positive")
    else:
        nsteps = max(1, int(np.ceil(abs(span) / abs(h) - 1e-9)))
    step = span / nsteps
    u = u_start + step * np.arange(nsteps + 1)
    left = u[:-1]
    p1, q1, r1 = (np.broadcast_to(np.asarray(x, float), left.shape)
                  for x in coefficients(left + GAUSS_OFFSETS[0] * step))
    p2, q2, r2 = (np.broadcast_to(np.asarray(x, float), left.shape)
                  for x in coefficients(left + GAUSS_OFFSETS[1] * step))
    return u, propagate(p1, q1, r1, p2, q2, r2, step, y0, backend)
