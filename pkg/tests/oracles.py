"""Independent reference computations used only by the tests."""

from fractions import Fraction
import math

import numpy as np

SY = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SY, SY)


def concurrence(rho):
    """Two-qubit concurrence from the spectrum of rho (YY) rho* (YY)."""
    R = rho @ YY @ rho.conj() @ YY
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(R).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def h2(p):
    return 0.0 if p <= 0 or p >= 1 else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def wootters_eof(rho):
    c = concurrence(rho)
    return h2((1 + math.sqrt(max(0.0, 1 - c * c))) / 2)


def page_exact(dA, dB):
    """Mean subsystem entropy by exact rational summation."""
    s = sum(Fraction(1, j) for j in range(dB + 1, dA * dB + 1)) - Fraction(dA - 1, 2 * dB)
    return float(s) / math.log(2)


def purity_mean(d, s):
    return Fraction(d + s, d * s + 1)
