"""Seeded samplers for Haar pure states, Haar unitaries, random subspaces and
rank-s induced mixed states.

Every draw goes through a :class:`SeedSpec`. The stream for a given
``(master_seed, trial_index, *sub)`` key is a Philox counter-based generator
keyed by a ``SeedSequence`` spawn key, so it does not depend on how trials
are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0
    sub: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.trial_index < 0 or any(k < 0 for k in self.sub):
            raise ValueError("trial index and sub-stream keys must be non-negative")

    def child(self, *keys: int) -> "SeedSpec":
        """Independent sub-stream, e.g. one per optimisation restart."""
        return SeedSpec(self.master_seed, self.trial_index, self.sub + tuple(keys))

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.master_seed & _MASK64, spawn_key=(self.trial_index, *self.sub)
        )
        return np.random.Generator(np.random.Philox(ss))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.rng()
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed)).rng()
    raise TypeError(f"expected SeedSpec, Generator or int seed, got {type(seed).__name__}")


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian entries, E|z|^2 = 1."""
    g = rng.standard_normal((2, *np.atleast_1d(shape)))
    return (g[0] + 1j * g[1]) / np.sqrt(2)


def haar_pure(dims: Sequence[int] | int, seed) -> np.ndarray:
    d = prod(dims) if not isinstance(dims, (int, np.integer)) else int(dims)
    if d < 1:
        raise ValueError("total dimension must be at least 1")
    g = complex_gaussian(_rng(seed), d)
    return g / np.linalg.norm(g)


def haar_unitary(d: int, seed) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    z = complex_gaussian(_rng(seed), (d, d))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


@dataclass(frozen=True)
class SubspaceIsometry:
    ambient_dims: tuple[int, int]
    columns: np.ndarray

    def __post_init__(self):
        dA, dB = self.ambient_dims
        if self.columns.ndim != 2 or self.columns.shape[0] != dA * dB:
            raise ValueError("isometry rows must equal dA*dB")
        if self.columns.shape[1] > dA * dB:
            raise ValueError("subspace dimension exceeds ambient dimension")
        gram = self.columns.conj().T @ self.columns
        if np.max(np.abs(gram - np.eye(self.s))) > 1e-8:
            raise ValueError("columns are not orthonormal")

    @property
    def s(self) -> int:
        return self.columns.shape[1]

    def projector(self) -> np.ndarray:
        return self.columns @ self.columns.conj().T

    def embed(self, coeffs: np.ndarray) -> np.ndarray:
        return self.columns @ coeffs


def random_subspace(dA: int, dB: int, s: int, seed) -> SubspaceIsometry:
    d = dA * dB
    if not 1 <= s <= d:
        raise ValueError(f"subspace dimension s={s} must lie in [1, {d}]")
    # first s columns of a Haar unitary; only the QR of a d x s Ginibre block is needed
    z = complex_gaussian(_rng(seed), (d, s))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return SubspaceIsometry((dA, dB), q * ph)


def random_mixed(d: int, s: int, seed) -> np.ndarray:
    """Rank-s random state: trace the s-dimensional factor out of a Haar
    pure state on C^d (x) C^s."""
    if d < 1 or s < 1:
        raise ValueError("dimensions must be at least 1")
    g = complex_gaussian(_rng(seed), (d, s))
    g /= np.linalg.norm(g)
    rho = g @ g.conj().T
    return (rho + rho.conj().T) / 2


def max_mixed_on_subspace(v: SubspaceIsometry) -> np.ndarray:
    return v.projector() / v.s
