"""Compare the compiled and NumPy Magnus steppers.

    python benchmarks/bench_magnus.py [--steps N] [--repeat R]

Integrates the Dirac system for one gamma with the model coupling
mu = 4 e^u (the small-a form) so the timing isolates the stepper.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fourierdirac import magnus


def coefficients(gamma: float):
    def f(u):
        return -4.0 * np.exp(u), -gamma * np.ones_like(u), gamma * np.ones_like(u)
    return f


def best_time(backend: str, steps: int, repeat: int, gamma: float) -> tuple[float, np.ndarray]:
    best, traj = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        _, traj = magnus.integrate(coefficients(gamma), 1.0, -12.0, None, (1.0, 0.0),
                                   backend=backend, steps=steps)
        best = min(best, time.perf_counter() - t0)
    return best, traj


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--gamma", type=float, default=2.0)
    args = parser.parse_args()

    print(f"default backend: {magnus.BACKEND}")
    t_py, y_py = best_time("python", args.steps, args.repeat, args.gamma)
    print(f"python  {args.steps} steps: {t_py:.4f} s")
    try:
        t_cy, y_cy = best_time("cython", args.steps, args.repeat, args.gamma)
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return
    scale = np.max(np.abs(y_py))
    print(f"cython  {args.steps} steps: {t_cy:.4f} s")
    print(f"speedup: {t_py / t_cy:.1f}x, max relative difference: {np.max(np.abs(y_py - y_cy)) / scale:.2e}")


if __name__ == "__main__":
    main()
