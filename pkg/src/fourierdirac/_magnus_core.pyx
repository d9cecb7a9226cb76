# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fourth-order Magnus propagation for traceless 2x2 linear systems."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, cosh, sin, sinh, sqrt, fabs

cnp.import_array()

cdef double SQRT3_12 = 0.14433756729740643  # sqrt(3) / 12


cdef inline void _step(double p1, double q1, double r1,
                       double p2, double q2, double r2,
                       double h, double *y0, double *y1) nogil:
    cdef double cp, cq, cr, P, Q, R, q2sq, w, c, sh, z0, z1
    # commutator [A2, A1] of traceless matrices [[p, q], [r, -p]]
    cp = q2 * r1 - q1 * r2
    cq = 2.0 * (p2 * q1 - q2 * p1)
    cr = 2.0 * (r2 * p1 - p2 * r1)
    P = 0.5 * h * (p1 + p2) + SQRT3_12 * h * h * cp
    Q = 0.5 * h * (q1 + q2) + SQRT3_12 * h * h * cq
    R = 0.5 * h * (r1 + r2) + SQRT3_12 * h * h * cr
    q2sq = P * P + Q * R
    if fabs(q2sq) < 1e-8:
        c = 1.0 + q2sq * (0.5 + q2sq / 24.0)
        sh = 1.0 + q2sq * (1.0 / 6.0 + q2sq / 120.0)
    elif q2sq > 0.0:
        w = sqrt(q2sq)
        c = cosh(w)
        sh = sinh(w) / w
    else:
        w = sqrt(-q2sq)
        c = cos(w)
        sh = sin(w) / w
    z0 = y0[0]
    z1 = y0[1]
    y1[0] = (c + sh * P) * z0 + sh * Q * z1
    y1[1] = sh * R * z0 + (c - sh * P) * z1


def propagate(const double[::1] p1, const double[::1] q1, const double[::1] r1,
              const double[::1] p2, const double[::1] q2, const double[::1] r2,
              double h, double y0, double y1):
    """Apply N Magnus steps; returns the (N + 1, 2) trajectory."""
    cdef Py_ssize_t n = p1.shape[0], k
    if not (q1.shape[0] == n and r1.shape[0] == n and p2.shape[0] == n
            and q2.shape[0] == n and r2.shape[0] == n):
        raise ValueError("coefficient arrays must have equal length")
    out = np.empty((n + 1, 2), dtype=np.float64)
    cdef double[:, ::1] y = out
    y[0, 0] = y0
    y[0, 1] = y1
    with nogil:
        for k in range(n):
            _step(p1[k], q1[k], r1[k], p2[k], q2[k], r2[k], h, &y[k, 0], &y[k + 1, 0])
    return out
