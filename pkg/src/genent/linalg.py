"""Dense complex linear-algebra kernels.

All entropies and logarithms are base 2. Eigenvalues in ``[-EIG_CLIP, 0)``
are treated as exact zeros before any logarithm is taken, and ``0 log 0 = 0``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

HERM_TOL = 1e-10
EIG_CLIP = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True)
class HermitianEigensystem:
    """Eigenvalues sorted descending, matching eigenvector columns, and the
    certification residual ``max_j ||M v_j - lambda_j v_j||``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients > 1e-10))

    def reconstruct(self) -> np.ndarray:
        k = len(self.coefficients)
        return np.einsum(
            "i,ai,bi->ab",
            self.coefficients,
            self.left_basis[:, :k],
            self.right_basis[:, :k],
        ).reshape(-1)


def _as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def hermitian_eig(m) -> HermitianEigensystem:
    m = _as_square(m)
    dev = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if dev > HERM_TOL * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValueError(f"matrix is not Hermitian: max |M - M^dag| = {dev:.3e}")
    w, v = np.linalg.eigh(m)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    residual = float(np.max(np.linalg.norm(m @ v - v * w, axis=0), initial=0.0))
    return HermitianEigensystem(w, v, residual)


def eigvalsh(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, without checks."""
    return np.linalg.eigvalsh(m)


def xlogx_sum(p: np.ndarray) -> float:
    """Shannon entropy ``-sum p log2 p`` with clipping of tiny negatives."""
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_CLIP]
    return float(-np.sum(p * np.log2(p)))


def spectrum_entropy(eigenvalues) -> float:
    return max(0.0, xlogx_sum(eigenvalues))


def schmidt(v, dA: int, dB: int) -> SchmidtDecomposition:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != dA * dB:
        raise ValueError(f"vector of length {v.size} does not match dims {dA}x{dB}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"vector is not normalised (norm {norm:.12f})")
    u, c, vh = np.linalg.svd(v.reshape(dA, dB))
    return SchmidtDecomposition(c, u, vh.T)


def schmidt_coefficients(v: np.ndarray, dA: int, dB: int) -> np.ndarray:
    """Fast path: singular values only, no validation."""
    return np.linalg.svd(np.reshape(v, (dA, dB)), compute_uv=False)


def _check_pair(rho, sigma):
    rho = _as_square(rho, "rho")
    sigma = _as_square(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def trace_distance(rho, sigma) -> float:
    """Trace norm ``||rho - sigma||_1`` (without the conventional 1/2)."""
    rho, sigma = _check_pair(rho, sigma)
    diff = rho - sigma
    diff = (diff + diff.conj().T) / 2
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.size and w[0] < -PSD_TOL:
        raise ValueError(f"matrix has negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho, sigma = _check_pair(rho, sigma)
    r = psd_sqrt(rho)
    psd_sqrt(sigma)  # validates sigma
    inner = r @ sigma @ r
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None)))) ** 2
    return min(max(f, 0.0), 1.0)


def pure_fidelity(phi: np.ndarray, psi: np.ndarray) -> float:
    return float(abs(np.vdot(phi, psi)) ** 2)


def relative_entropy(rho, sigma) -> float:
    """``D(rho || sigma)`` in bits; ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho, sigma = _check_pair(rho, sigma)
    wr, vr = np.linalg.eigh((rho + rho.conj().T) / 2)
    ws, vs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    wr = np.where(wr > EIG_CLIP, wr, 0.0)
    kernel = ws <= EIG_CLIP
    # weight of rho on the kernel of sigma
    if np.any(kernel):
        leak = float(np.real(np.trace(vs[:, kernel].conj().T @ rho @ vs[:, kernel])))
        if leak > 1e-9:
            log.warning("relative entropy: support violation (weight %.3e outside supp sigma)", leak)
            return math.inf
    log_s = np.zeros_like(ws)
    log_s[~kernel] = np.log2(ws[~kernel])
    # Tr rho log rho - Tr rho log sigma
    term1 = -xlogx_sum(wr)
    overlap = np.abs(vr.conj().T @ vs) ** 2  # |<r_i|s_j>|^2
    term2 = float(wr @ overlap @ log_s)
    return max(0.0, term1 - term2)


def op_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))
