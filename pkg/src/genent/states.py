"""Multipartite registers and the structural maps on them.

Subsystem ordering is row-major with party 0 slowest: the basis vector
``|i_0 i_1 ... i_{n-1}>`` sits at flat index ``np.ravel_multi_index(i, dims)``.
Parties are 0-indexed throughout the library (the CLI speaks 1-indexed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

PURE_TOL = 1e-10
MIXED_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Register:
    """A pure (vector) or mixed (density matrix) state on ``prod(dims)``."""

    dims: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid dims {self.dims}")
        object.__setattr__(self, "dims", dims)
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        D = prod(dims)
        if data.ndim == 1:
            if data.size != D:
                raise ValueError(f"vector length {data.size} != prod(dims) = {D}")
            n = np.linalg.norm(data)
            if abs(n - 1) > PURE_TOL:
                raise ValueError(f"pure payload not normalised (norm {n:.12g})")
        elif data.ndim == 2:
            if data.shape != (D, D):
                raise ValueError(f"density matrix shape {data.shape} != ({D}, {D})")
            if np.max(np.abs(data - data.conj().T)) > MIXED_TOL:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data).real
            if abs(tr - 1) > MIXED_TOL:
                raise ValueError(f"density matrix trace {tr:.12g} != 1")
            wmin = np.linalg.eigvalsh((data + data.conj().T) / 2)[0]
            if wmin < -MIXED_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {wmin:.3e}")
        else:
            raise ValueError("payload must be a vector or a square matrix")

    @classmethod
    def pure(cls, vec, dims: Sequence[int]) -> "Register":
        return cls(tuple(dims), np.asarray(vec, dtype=complex).reshape(-1))

    @classmethod
    def mixed(cls, rho, dims: Sequence[int]) -> "Register":
        return cls(tuple(dims), np.asarray(rho, dtype=complex))

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_mixed(self) -> "Register":
        return self if not self.is_pure else Register(self.dims, self.density())

    # serialisation -------------------------------------------------------

    def to_json_dict(self) -> dict:
        flat = self.data.reshape(-1)
        inter = np.empty(2 * flat.size)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        return {
            "dims": list(self.dims),
            "kind": "pure" if self.is_pure else "mixed",
            "entries": inter.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Register":
        unknown = set(obj) - {"dims", "kind", "entries"}
        if unknown:
            raise ValueError(f"unknown keys in state file: {sorted(unknown)}")
        dims = tuple(int(d) for d in obj["dims"])
        vals = np.asarray(obj["entries"], dtype=float)
        if vals.size % 2:
            raise ValueError("entries must interleave (re, im) pairs")
        z = vals[0::2] + 1j * vals[1::2]
        D = prod(dims)
        if obj["kind"] == "pure":
            return cls(dims, z)
        if obj["kind"] == "mixed":
            return cls(dims, z.reshape(D, D))
        raise ValueError(f"unknown state kind {obj['kind']!r}")

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "Register":
        return cls.from_json_dict(json.loads(text))


def _check_parties(r: Register, parties: Iterable[int]) -> list[int]:
    ps = sorted(set(int(p) for p in parties))
    for p in ps:
        if not 0 <= p < r.n_parties:
            raise ValueError(f"party index {p} out of range for {r.n_parties} parties")
    return ps


def reduced_density(data: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace on raw arrays (vector or density matrix); ``keep`` sorted."""
    dims = list(dims)
    n = len(dims)
    keep = list(keep)
    trace_out = [i for i in range(n) if i not in keep]
    dk = prod(dims[i] for i in keep)
    if data.ndim == 1:
        psi = data.reshape(dims).transpose(keep + trace_out).reshape(dk, -1)
        return psi @ psi.conj().T
    t = data.reshape(dims + dims)
    perm = keep + trace_out
    t = t.transpose(perm + [n + i for i in perm])
    dt = prod(dims[i] for i in trace_out)
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def partial_trace(r: Register, keep: Iterable[int]) -> Register:
    keep = _check_parties(r, keep)
    if not keep:
        raise ValueError("keep set must be non-empty")
    rho = reduced_density(r.data, r.dims, keep)
    rho = (rho + rho.conj().T) / 2
    return Register(tuple(r.dims[i] for i in keep), rho)


def regroup(r: Register, cut: Iterable[int]) -> Register:
    """Bipartite view ``X | complement``: permute parties so that ``cut`` comes
    first and merge each side into a single factor."""
    X = _check_parties(r, cut)
    if not X or len(X) == r.n_parties:
        raise ValueError("cut must be a non-empty proper subset of the parties")
    rest = [i for i in range(r.n_parties) if i not in X]
    perm = X + rest
    dX = prod(r.dims[i] for i in X)
    dY = prod(r.dims[i] for i in rest)
    n = r.n_parties
    if r.is_pure:
        data = r.data.reshape(r.dims).transpose(perm).reshape(-1)
    else:
        data = (
            r.data.reshape(r.dims + r.dims)
            .transpose(perm + [n + i for i in perm])
            .reshape(dX * dY, dX * dY)
        )
    return Register((dX, dY), data)


def partial_transpose_matrix(rho: np.ndarray, dims: Sequence[int], part: int) -> np.ndarray:
    dims = list(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[part], axes[n + part] = axes[n + part], axes[part]
    D = prod(dims)
    return t.transpose(axes).reshape(D, D)


def partial_transpose(r: Register, part: int = 1) -> np.ndarray:
    if r.is_pure:
        raise ValueError("partial transpose needs a density-matrix payload; call to_mixed() first")
    _check_parties(r, [part])
    return partial_transpose_matrix(r.data, r.dims, part)


def _check_projector(p: np.ndarray, d: int) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.shape != (d, d):
        raise ValueError(f"projector shape {p.shape} does not match local dimension {d}")
    if np.max(np.abs(p - p.conj().T)) > 1e-8 or np.max(np.abs(p @ p - p)) > 1e-8:
        raise ValueError("projector is not Hermitian idempotent")
    return p


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def project_renormalize(r: Register, projectors: Sequence[np.ndarray | None]) -> tuple[Register, float]:
    """Apply ``(x) P_i`` (``None`` meaning identity) and renormalise.

    Returns the post-projection state and the probability ``Tr((x)P_i rho)``.
    """
    if len(projectors) != r.n_parties:
        raise ValueError("need one projector (or None) per party")
    ps = [
        np.eye(d, dtype=complex) if p is None else _check_projector(p, d)
        for p, d in zip(projectors, r.dims)
    ]
    big = kron_all(ps)
    if r.is_pure:
        v = big @ r.data
        prob = float(np.vdot(v, v).real)
        if prob < 1e-12:
            raise ValueError("projection annihilates state")
        return Register(r.dims, v / np.sqrt(prob)), prob
    m = big @ r.data @ big
    prob = float(np.trace(m).real)
    if prob < 1e-12:
        raise ValueError("projection annihilates state")
    m = m / prob
    return Register(r.dims, (m + m.conj().T) / 2), prob


def purity(r: Register) -> float:
    if r.is_pure:
        return 1.0
    return float(np.real(np.vdot(r.data, r.data)))


def apply_local_unitary(r: Register, part: int, u: np.ndarray) -> Register:
    _check_parties(r, [part])
    d = r.dims[part]
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d) or np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-8:
        raise ValueError(f"operator on party {part} is not a {d}x{d} unitary")
    n = r.n_parties
    if r.is_pure:
        t = np.moveaxis(r.data.reshape(r.dims), part, 0)
        t = np.tensordot(u, t, axes=(1, 0))
        return Register(r.dims, np.moveaxis(t, 0, part).reshape(-1))
    t = r.data.reshape(r.dims + r.dims)
    t = np.moveaxis(np.tensordot(u, np.moveaxis(t, part, 0), axes=(1, 0)), 0, part)
    t = np.moveaxis(t, n + part, -1) @ u.conj().T
    t = np.moveaxis(t, -1, n + part)
    m = t.reshape(r.dim, r.dim)
    return Register(r.dims, (m + m.conj().T) / 2)


# common states ---------------------------------------------------------------


def basis_state(index: Sequence[int], dims: Sequence[int]) -> Register:
    v = np.zeros(prod(dims), dtype=complex)
    v[np.ravel_multi_index(tuple(index), tuple(dims))] = 1
    return Register.pure(v, dims)


def max_entangled(dA: int, dB: int | None = None) -> Register:
    """``sum_i |i>|i> / sqrt(dA)`` using the first dA basis vectors of B."""
    dB = dA if dB is None else dB
    if dB < dA:
        raise ValueError("need dB >= dA")
    v = np.zeros(dA * dB, dtype=complex)
    for i in range(dA):
        v[i * dB + i] = 1
    return Register.pure(v / np.sqrt(dA), (dA, dB))


def ghz(n: int, d: int = 2) -> Register:
    v = np.zeros(d**n, dtype=complex)
    for i in range(d):
        v[np.ravel_multi_index((i,) * n, (d,) * n)] = 1
    return Register.pure(v / np.sqrt(d), (d,) * n)


def w_state(n: int) -> Register:
    v = np.zeros(2**n, dtype=complex)
    for k in range(n):
        v[1 << (n - 1 - k)] = 1
    return Register.pure(v / np.sqrt(n), (2,) * n)
