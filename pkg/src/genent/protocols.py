"""Constructive protocols built on random subspaces and random states."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from . import _stiefel
from .linalg import EIG_CLIP, spectrum_entropy
from .measures import LN2, closest_max_entangled, eof_upper_bound, purity_separable
from .sampler import SeedSpec, SubspaceIsometry, complex_gaussian, random_mixed
from .states import Register, max_entangled, partial_trace, regroup


def lipschitz_constant(dA: int) -> float:
    """Lipschitz constant of the reduced-state entropy; dA < 3 falls back to
    the dA = 3 value."""
    return math.sqrt(8) * math.log2(max(dA, 3))


@dataclass(frozen=True)
class CertifiedSubspace:
    isometry: SubspaceIsometry
    min_entanglement_estimate: float
    method: str  # "net" | "minimize"
    certified: bool
    net_epsilon: float | None = None
    net_size: int | None = None
    restarts: int | None = None
    net_minimum: float | None = None
    argmin: np.ndarray | None = None

    @property
    def deficit(self) -> float:
        return math.log2(self.isometry.ambient_dims[0]) - self.min_entanglement_estimate

    def summary(self) -> dict:
        out = {
            "dA": self.isometry.ambient_dims[0],
            "dB": self.isometry.ambient_dims[1],
            "s": self.isometry.s,
            "method": self.method,
            "certified": self.certified,
            "min_entanglement_estimate": self.min_entanglement_estimate,
            "deficit": self.deficit,
        }
        if self.method == "net":
            out.update(net_epsilon=self.net_epsilon, net_size=self.net_size, net_minimum=self.net_minimum)
        else:
            out["restarts"] = self.restarts
        return out


class BudgetExceeded(ValueError):
    pass


def _entanglement_of_vec(v: np.ndarray, dA: int, dB: int) -> float:
    c = np.linalg.svd(v.reshape(dA, dB), compute_uv=False)
    return spectrum_entropy(c**2)


def _entanglement_batch(vs: np.ndarray, dA: int, dB: int) -> np.ndarray:
    c = np.linalg.svd(vs.reshape(-1, dA, dB), compute_uv=False) ** 2
    c = c / c.sum(axis=1, keepdims=True)
    c = np.where(c > EIG_CLIP, c, 1.0)
    return -np.sum(c * np.log2(c), axis=1)


def sphere_net_size(s: int, eps: float) -> int:
    """Points of the cube-face grid net on the unit sphere of C^s."""
    m = 2 * s
    h = eps / math.sqrt(max(m - 1, 1))
    per_axis = int(math.floor(2 / h)) + 1
    return 2 * m * per_axis ** (m - 1)


def sphere_net(s: int, eps: float) -> np.ndarray:
    """An eps/2-net (Euclidean norm) for unit vectors of C^s.

    Grid of spacing ``h = eps/sqrt(2s-1)`` on every face of the cube
    ``[-1, 1]^{2s}``, pushed radially onto the sphere. A unit vector, scaled
    to the cube surface, is within ``h sqrt(2s-1)/2`` of a face grid point,
    and radial projection onto the ball does not increase distances.
    """
    m = 2 * s
    if m == 2:
        # s = 1: global phase is irrelevant, one state suffices
        return np.ones((1, 1), dtype=complex)
    h = eps / math.sqrt(m - 1)
    n = int(math.floor(2 / h)) + 1
    ticks = np.linspace(-1.0, 1.0, n)
    free = np.array(list(itertools.product(ticks, repeat=m - 1)))
    pts = []
    for axis in range(m):
        for sign in (-1.0, 1.0):
            full = np.insert(free, axis, sign, axis=1)
            pts.append(full)
    x = np.concatenate(pts)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x[:, :s] + 1j * x[:, s:]


def _entropy_objective(V: np.ndarray, dA: int, dB: int):
    """Entanglement of ``V c`` for unit ``c``, as an isometry objective."""
    Vc = V.conj()

    def fun(c):
        phi = V @ c[:, 0]
        M = phi.reshape(dA, dB)
        sig = M @ M.conj().T
        w, vec = np.linalg.eigh(sig)
        p = max(float(w.sum()), 1e-300)
        w = np.clip(w, EIG_CLIP * 1e-3, None)
        q = w / p
        val = float(-np.sum(w * np.log2(q)))
        G = -(vec * np.log(q)) @ vec.conj().T / LN2
        g = (G @ M).reshape(-1)
        return val, (Vc.T @ g)[:, None]

    return fun


def certify_subspace(
    V: SubspaceIsometry,
    mode: str = "minimize",
    budget: int = 10**6,
    seed: SeedSpec | int = 0,
    epsilon: float = 0.5,
    restarts: int = 20,
    iters: int = 300,
) -> CertifiedSubspace:
    """Lower-bound (net mode) or estimate from above (minimise mode) the
    smallest entanglement of any pure state in ``span(V)``."""
    dA, dB = V.ambient_dims
    s = V.s
    if mode == "net":
        if s > 1 and not 0 < epsilon < 1:
            raise ValueError("net epsilon must lie in (0, 1)")
        size = 1 if s == 1 else sphere_net_size(s, epsilon)
        if size > budget:
            raise BudgetExceeded(
                f"net for s={s}, epsilon={epsilon} needs {size} points, budget is {budget}"
            )
        coeffs = sphere_net(s, epsilon)
        best, arg = math.inf, None
        for chunk in range(0, len(coeffs), 4096):
            cs = coeffs[chunk : chunk + 4096]
            ents = _entanglement_batch(cs @ V.columns.T, dA, dB)
            i = int(np.argmin(ents))
            if ents[i] < best:
                best, arg = float(ents[i]), cs[i]
        correction = 0.0 if s == 1 else lipschitz_constant(dA) * epsilon / 2
        est = min(best - correction, math.log2(dA))
        return CertifiedSubspace(
            V, est, "net", True, net_epsilon=epsilon, net_size=size,
            net_minimum=best, argmin=V.columns @ arg,
        )
    if mode != "minimize":
        raise ValueError(f"unknown mode {mode!r}; use 'net' or 'minimize'")
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    fun = _entropy_objective(V.columns, dA, dB)
    best, arg = math.inf, None
    rng = seed.rng()
    for k in range(max(restarts, 1)):
        c0 = complex_gaussian(rng, (s, 1))
        c, val = _stiefel.minimize(fun, c0 / np.linalg.norm(c0), iters=iters)
        if val < best:
            best, arg = val, c[:, 0]
    if s == 1:
        best = _entanglement_of_vec(V.columns[:, 0], dA, dB)
    est = min(max(best, 0.0), math.log2(dA))
    return CertifiedSubspace(V, est, "minimize", False, restarts=restarts, argmin=V.columns @ arg)


# multiparty distillation ------------------------------------------------------


@dataclass(frozen=True)
class DistillationOutcome:
    label: tuple[int, ...]
    probability: float
    post_state: Register
    entanglement: float


def multiparty_distill(
    phi: Register, pair: Sequence[int]
) -> tuple[list[DistillationOutcome], int]:
    """Every party outside ``pair`` measures in its computational basis.

    Returns the outcomes with non-negligible probability (ordered by label)
    and the number of omitted zero-probability outcomes.
    """
    if not phi.is_pure:
        raise ValueError("multiparty distillation needs a pure state")
    i, j = (int(p) for p in pair)
    n = phi.n_parties
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"pair {pair} is not two distinct parties of {n}")
    others = [k for k in range(n) if k not in (i, j)]
    t = phi.data.reshape(phi.dims).transpose(others + [i, j])
    di, dj = phi.dims[i], phi.dims[j]
    t = t.reshape(-1, di * dj)
    labels = list(itertools.product(*(range(phi.dims[k]) for k in others)))
    out, omitted = [], 0
    probs = np.sum(np.abs(t) ** 2, axis=1)
    for row, lab, p in zip(t, labels, probs):
        if p < 1e-12:
            omitted += 1
            continue
        v = row / np.sqrt(p)
        e = _entanglement_of_vec(v, di, dj)
        out.append(DistillationOutcome(tuple(lab), float(p), Register.pure(v, (di, dj)), e))
    return out, omitted


# superdense coding ------------------------------------------------------------


def _check_in_subspace(phi: np.ndarray, V: SubspaceIsometry):
    resid = phi - V.columns @ (V.columns.conj().T @ phi)
    if np.linalg.norm(resid) > 1e-8:
        raise ValueError(f"target state lies outside the subspace (residual {np.linalg.norm(resid):.2e})")


def default_reference(dA: int, dB: int) -> Register:
    return max_entangled(dA, dB)


def sdc_encode(
    target: Register, V: CertifiedSubspace | SubspaceIsometry, reference: Register | None = None
) -> np.ndarray:
    """Unitary U on B with ``(1 (x) U)|reference> = closest maximally
    entangled state to the target``."""
    iso = V.isometry if isinstance(V, CertifiedSubspace) else V
    dA, dB = iso.ambient_dims
    if dB < dA:
        raise ValueError("needs dB >= dA")
    _check_in_subspace(target.data, iso)
    Phi, _ = closest_max_entangled(Register.pure(target.data, (dA, dB)))
    ref = default_reference(dA, dB) if reference is None else reference
    # coefficient matrices; (1 (x) U) acts as M -> M U^T
    Mr = ref.data.reshape(dA, dB) * np.sqrt(dA)
    Mp = Phi.data.reshape(dA, dB) * np.sqrt(dA)
    # Mr = A B^T with A unitary and B a dB x dA isometry, so U B = (A^dag Mp)^T
    A, _, vh = np.linalg.svd(Mr)
    B = vh[:dA].T
    T = (A.conj().T @ Mp).T
    # complete the partial isometry B -> T to a unitary
    cB = null_space(B.conj().T) if dB > dA else np.zeros((dB, 0))
    cT = null_space(T.conj().T) if dB > dA else np.zeros((dB, 0))
    return T @ B.conj().T + cT @ cB.conj().T


def sdc_run(
    V: CertifiedSubspace | SubspaceIsometry,
    target: Register,
    reference: Register | None = None,
) -> tuple[np.ndarray, float]:
    """Simulate encode, transmit B, project onto the subspace.

    The receiver's output is the mixture of the renormalised projection (with
    its success probability) and the fallback state (first column of V).
    Returns the output density matrix on A (x) B and its fidelity with the
    target.
    """
    iso = V.isometry if isinstance(V, CertifiedSubspace) else V
    dA, dB = iso.ambient_dims
    ref = default_reference(dA, dB) if reference is None else reference
    U = sdc_encode(target, iso, ref)
    sent = (ref.data.reshape(dA, dB) @ U.T).reshape(-1)
    coeff = iso.columns.conj().T @ sent
    p = float(np.vdot(coeff, coeff).real)
    fallback = iso.columns[:, 0]
    out = (1 - p) * np.outer(fallback, fallback.conj())
    if p > 1e-12:
        proj = iso.columns @ coeff
        out = out + np.outer(proj, proj.conj())
    fid = float(np.real(np.vdot(target.data, out @ target.data)))
    return out, min(max(fid, 0.0), 1.0)


# locking ------------------------------------------------------------------------


@dataclass(frozen=True)
class LockingRow:
    trial: int
    before: float
    after: float
    after_purity_separable: bool

    @property
    def gap(self) -> float:
        return self.before - self.after


def default_locking_rank(n: int) -> int:
    return max(1, (4**n) // max(n * n, 1))


def locking_trial(
    n: int,
    traced: int,
    seed: SeedSpec,
    rank: int | None = None,
    restarts: int = 5,
    iters: int = 200,
    trial: int = 0,
) -> LockingRow:
    """One draw of the locking demonstration."""
    if n < 1:
        raise ValueError("need at least one qubit per side")
    if not 0 <= traced <= n:
        raise ValueError(f"traced={traced} must lie in [0, n={n}]")
    s = default_locking_rank(n) if rank is None else rank
    d = 2**n
    reg = Register.mixed(random_mixed(d * d, s, seed.child(0)), (2,) * (2 * n))
    full = regroup(reg, range(n))
    before = eof_upper_bound(full, restarts=restarts, iters=iters, seed=seed.child(1)).value
    if traced == 0:
        return LockingRow(trial, before, before, purity_separable(full))
    if traced == n:
        # Alice keeps nothing: the remainder is a state of Bob alone
        return LockingRow(trial, before, 0.0, True)
    red = partial_trace(reg, range(traced, 2 * n))
    after_reg = regroup(red, range(n - traced))
    after = eof_upper_bound(after_reg, restarts=restarts, iters=iters, seed=seed.child(1)).value
    return LockingRow(trial, before, after, purity_separable(after_reg))


def locking_experiment(
    n_qubits_per_side: int,
    traced: int,
    trials: int,
    seed: int,
    rank: int | None = None,
    restarts: int = 5,
    iters: int = 200,
) -> list[LockingRow]:
    """E_f upper bound of a random rank-s state on n+n qubits before and after
    Alice discards ``traced`` of her qubits."""
    return [
        locking_trial(n_qubits_per_side, traced, SeedSpec(seed, t), rank, restarts, iters, trial=t)
        for t in range(trials)
    ]
