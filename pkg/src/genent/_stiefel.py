"""Steepest descent on complex isometries ``X`` (``X^dag X = 1``).

Objectives return ``(value, egrad)`` where ``egrad = d value / d conj(X)``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


def retract(y: np.ndarray) -> np.ndarray:
    """Polar retraction: nearest isometry to ``y``."""
    u, _, vh = np.linalg.svd(y, full_matrices=False)
    return u @ vh


def riemannian_grad(x: np.ndarray, egrad: np.ndarray) -> np.ndarray:
    s = x.conj().T @ egrad
    return egrad - x @ ((s + s.conj().T) / 2)


def minimize(
    fun: Objective,
    x0: np.ndarray,
    iters: int = 200,
    step: float = 0.5,
    gtol: float = 1e-9,
    ftol: float = 1e-13,
) -> tuple[np.ndarray, float]:
    """Armijo-backtracked steepest descent. Returns the best point seen."""
    x = retract(x0)
    f, eg = fun(x)
    t = step
    for _ in range(iters):
        g = riemannian_grad(x, eg)
        gn2 = float(np.vdot(g, g).real)
        if gn2 < gtol**2:
            break
        for _ in range(40):
            y = retract(x - t * g)
            fy, egy = fun(y)
            if fy <= f - 1e-4 * t * gn2:
                break
            t *= 0.5
        else:
            break
        improved = f - fy
        x, f, eg = y, fy, egy
        t = min(t * 2.0, 1e3)
        if improved < ftol:
            break
    return x, f
