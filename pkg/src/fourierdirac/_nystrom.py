"""Shared Nystrom evaluation of the truncated cosine/sine operators.

One evaluation at (a, kind, n, precision) factors I + F and I - F once and
returns both log-determinants, both solutions of the integral equations and
their endpoint values. Results are cached and immutable.

Double precision is accurate while 1 - lambda_max stays far above machine
epsilon. The largest eigenvalues of the truncated transform approach one like
exp(-2s), s = 2 pi a^2, so past ``DOUBLE_S_MAX`` the factorizations are carried
out in multiprecision floating point (python-flint, arb in approximate mode).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .specfun import gauss_legendre

DOUBLE_S_MAX = 5.0
_GUARD_BITS = 96
_flint_lock = threading.RLock()


def trig(kind: str):
    return np.cos if kind == "cos" else np.sin


def default_nodes(a: float) -> int:
    """Node count resolving the kernel frequency s = 2 pi a^2.

    Empirically the endpoint values are converged to all printed digits once
    n >= s + 24; the count is rounded up to a multiple of 16, never below 64.
    """
    s = 2.0 * math.pi * a * a
    return max(64, 16 * math.ceil((s + 24.0) / 16.0))


def resolve_precision(a: float, precision="auto") -> int | None:
    """Working precision in bits, or ``None`` for hardware doubles."""
    if precision in ("double", None, 53):
        return None
    if precision == "auto":
        s = 2.0 * math.pi * a * a
        if s <= DOUBLE_S_MAX:
            return None
        bits = _GUARD_BITS + math.ceil(2.0 * s / math.log(2.0))
        return 32 * math.ceil(bits / 32)
    if precision == "extended":
        return resolve_precision(max(a, 1.0), "auto") or 160
    bits = int(precision)
    if bits <= 53:
        return None
    return bits


@dataclass(frozen=True)
class Evaluation:
    a: float
    kind: str
    n: int
    prec: int | None
    log_det_plus: float
    log_det_minus: float
    g_plus: np.ndarray
    g_minus: np.ndarray
    end_plus: float
    end_minus: float

    def g(self, sign: int) -> np.ndarray:
        return self.g_plus if sign > 0 else self.g_minus

    def end(self, sign: int) -> float:
        return self.end_plus if sign > 0 else self.end_minus

    def log_det(self, sign: int) -> float:
        return self.log_det_plus if sign > 0 else self.log_det_minus


def _readonly(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    x.setflags(write=False)
    return x


def _kernel(a: float, kind: str, t: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return 2.0 * a * trig(kind)(2.0 * math.pi * a * a * np.multiply.outer(t, tau))


def _evaluate_double(a: float, kind: str, n: int) -> Evaluation:
    grid = gauss_legendre(n)
    t, w = grid.nodes, grid.weights
    sw = np.sqrt(w)
    sym = sw[:, None] * _kernel(a, kind, t, t) * sw[None, :]
    s = 2.0 * math.pi * a * a
    rhs = 2.0 * trig(kind)(s * t)
    k_end = _kernel(a, kind, np.array([1.0]), t)[0] * w
    rhs_end = 2.0 * float(trig(kind)(s))
    out = {}
    eye = np.eye(n)
    for sign in (1, -1):
        lu, piv = scipy.linalg.lu_factor(eye + sign * sym, check_finite=True)
        diag = np.diag(lu)
        swaps = np.count_nonzero(piv != np.arange(n))
        if np.prod(np.sign(diag)) * (-1) ** swaps <= 0:
            raise FloatingPointError("I +/- F is not positive definite; contraction violated")
        logdet = float(np.sum(np.log(np.abs(diag))))
        g = scipy.linalg.lu_solve((lu, piv), sw * rhs) / sw
        end = rhs_end - sign * float(np.dot(k_end, g))
        out[sign] = (logdet, g, end)
    return Evaluation(
        a, kind, n, None,
        out[1][0], out[-1][0],
        _readonly(out[1][1]), _readonly(out[-1][1]),
        out[1][2], out[-1][2],
    )


def _double_log_det_d(a: float, kind: str, n: int) -> float:
    grid = gauss_legendre(n)
    sw = grid.sqrt_weights
    sym = sw[:, None] * _kernel(a, kind, grid.nodes, grid.nodes) * sw[None, :]
    sign, logdet = np.linalg.slogdet(np.eye(n) - sym @ sym)
    if sign <= 0:
        raise FloatingPointError("det(1 - D) is not positive; contraction violated")
    return float(logdet)


# ---------------------------------------------------------------- multiprecision

@lru_cache(maxsize=32)
def _arb_nodes(n: int, prec: int):
    from flint import arb, ctx

    with _flint_lock:
        old = ctx.prec
        ctx.prec = prec
        try:
            pairs = [arb.legendre_p_root(n, k, weight=True) for k in range(n)]
            # roots come in decreasing order on (-1, 1)
            nodes = tuple(((1 - x) / 2).mid() for x, _ in pairs)
            weights = tuple((w / 2).mid() for _, w in pairs)
        finally:
            ctx.prec = old
    return nodes, weights


def _arb_float(x) -> float:
    return float(x.mid())


def _arb_operator(a: float, kind: str, n: int, prec: int):
    from flint import arb, arb_mat

    t, w = _arb_nodes(n, prec)
    aa = arb(a)
    s = 2 * arb.pi() * aa * aa
    fn = (lambda z: z.cos()) if kind == "cos" else (lambda z: z.sin())
    two_a = 2 * aa
    kern = [[two_a * fn(s * ti * tj) * wj for tj, wj in zip(t, w)] for ti in t]
    return t, w, s, fn, two_a, kern, arb_mat


def _evaluate_arb(a: float, kind: str, n: int, prec: int) -> Evaluation:
    from flint import ctx

    with _flint_lock:
        old = ctx.prec
        ctx.prec = prec
        try:
            t, w, s, fn, two_a, kern, arb_mat = _arb_operator(a, kind, n, prec)
            rhs = arb_mat([[2 * fn(s * ti)] for ti in t])
            k_end = [two_a * fn(s * tj) * wj for tj, wj in zip(t, w)]
            rhs_end = 2 * fn(s)
            out = {}
            for sign in (1, -1):
                mat = arb_mat([
                    [(1 if i == j else 0) + sign * kern[i][j] for j in range(n)]
                    for i in range(n)
                ])
                g = mat.solve(rhs, algorithm="approx")
                det = mat.det()
                if not det.mid() > 0:
                    raise FloatingPointError("I +/- F is not positive definite; contraction violated")
                logdet = det.mid().log()
                gl = [g[i, 0] for i in range(n)]
                end = rhs_end - sign * sum(k * gi for k, gi in zip(k_end, gl))
                out[sign] = (_arb_float(logdet), np.array([_arb_float(x) for x in gl]), _arb_float(end))
        finally:
            ctx.prec = old
    return Evaluation(
        a, kind, n, prec,
        out[1][0], out[-1][0],
        _readonly(out[1][1]), _readonly(out[-1][1]),
        out[1][2], out[-1][2],
    )


def _arb_log_det_d(a: float, kind: str, n: int, prec: int) -> float:
    from flint import ctx

    with _flint_lock:
        old = ctx.prec
        ctx.prec = prec
        try:
            _, _, _, _, _, kern, arb_mat = _arb_operator(a, kind, n, prec)
            k = arb_mat(kern)
            k2 = k * k
            mat = arb_mat([[(1 if i == j else 0) - k2[i, j] for j in range(n)] for i in range(n)])
            det = mat.det()
            if not det.mid() > 0:
                raise FloatingPointError("det(1 - D) is not positive; contraction violated")
            return _arb_float(det.mid().log())
        finally:
            ctx.prec = old


# ---------------------------------------------------------------- cached entry points

@lru_cache(maxsize=16384)
def evaluate(a: float, kind: str, n: int, prec: int | None) -> Evaluation:
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError(f"a must be a positive finite number, got {a!r}")
    if prec is None:
        return _evaluate_double(a, kind, n)
    return _evaluate_arb(a, kind, n, prec)


@lru_cache(maxsize=4096)
def log_det_d(a: float, kind: str, n: int, prec: int | None) -> float:
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError(f"a must be a positive finite number, got {a!r}")
    if prec is None:
        return _double_log_det_d(a, kind, n)
    return _arb_log_det_d(a, kind, n, prec)


def evaluate_auto(a: float, kind: str, n: int | None = None, precision="auto") -> Evaluation:
    a = float(a)
    if n is None:
        n = default_nodes(a)
    return evaluate(a, kind, int(n), resolve_precision(a, precision))
