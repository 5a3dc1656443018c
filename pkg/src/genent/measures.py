"""Correlation measures of bipartite and multipartite states.

The variational quantities are reported one-sidedly: :func:`eof_upper_bound`
returns an upper bound on the entanglement of formation and
:func:`oneway_info_lower_bound` a lower bound on the one-way information.
Neither is ever the exact value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _stiefel
from .linalg import EIG_CLIP, spectrum_entropy, trace_distance
from .sampler import SeedSpec, haar_unitary, complex_gaussian
from .states import (
    Register,
    partial_trace,
    partial_transpose_matrix,
    purity,
    regroup,
)

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
NPT_TOL = 1e-9
DISTILL_TOL = 1e-7


@dataclass(frozen=True)
class EnsembleDecomposition:
    weights: np.ndarray
    members: np.ndarray  # rows are normalised pure states on the full space

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ia,ib->ab", self.weights, self.members, self.members.conj())


@dataclass(frozen=True)
class EofResult:
    """Upper bound on E_f with its witnessing decomposition."""

    value: float
    decomposition: EnsembleDecomposition
    restarts: int
    iters: int


@dataclass(frozen=True)
class PovmOnA:
    vectors: np.ndarray  # row i is m_i with M_i = |m_i><m_i|

    @property
    def elements(self) -> np.ndarray:
        return np.einsum("ia,ib->iab", self.vectors, self.vectors.conj())


@dataclass(frozen=True)
class OnewayResult:
    value: float
    povm: PovmOnA
    restarts: int


@dataclass(frozen=True)
class DistillabilityWitness:
    distillable: bool
    negativity: float  # -lambda_min of the projected, partially transposed state
    P: np.ndarray
    Q: np.ndarray


def _bipartite(r: Register, cut: Iterable[int] | None = None) -> Register:
    if cut is not None:
        return regroup(r, cut)
    if r.n_parties == 2:
        return r
    raise ValueError(f"state has {r.n_parties} parties; pass a cut to group them")


def entropy(rho) -> float:
    if isinstance(rho, Register):
        if rho.is_pure:
            return 0.0
        rho = rho.data
    rho = np.asarray(rho, dtype=complex)
    return spectrum_entropy(np.linalg.eigvalsh((rho + rho.conj().T) / 2))


def pure_entanglement(phi: Register, cut: Iterable[int] = (0,)) -> float:
    if not phi.is_pure:
        raise ValueError("entropy of entanglement needs a pure payload")
    b = regroup(phi, cut)
    c = np.linalg.svd(b.data.reshape(b.dims), compute_uv=False)
    return spectrum_entropy(c**2)


def mutual_information(rho: Register, cut: Iterable[int] | None = None) -> float:
    b = _bipartite(rho, cut)
    sa = entropy(partial_trace(b, [0]))
    sb = entropy(partial_trace(b, [1]))
    return max(0.0, sa + sb - entropy(b))


def coherent_information(rho: Register, cut: Iterable[int] | None = None) -> float:
    """``S(B) - S(AB)``; lower-bounds the one-way distillable entanglement."""
    b = _bipartite(rho, cut)
    return entropy(partial_trace(b, [1])) - entropy(b)


def is_npt(rho: Register, cut: Iterable[int] | None = None) -> tuple[bool, float]:
    b = _bipartite(rho, cut).to_mixed()
    pt = partial_transpose_matrix(b.data, b.dims, 1)
    lmin = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
    return lmin < -NPT_TOL, lmin


def purity_separable(rho: Register) -> bool:
    """Purity certificate: a d-dimensional state with ``Tr rho^2 <= 1/(d-1)``
    is separable. ``False`` means inconclusive."""
    d = rho.dim
    if d < 2:
        raise ValueError("purity criterion needs total dimension >= 2")
    return purity(rho) <= 1.0 / (d - 1) + 1e-15


# entanglement of formation ----------------------------------------------------


def _member_entropy_objective(W: np.ndarray, dA: int, dB: int):
    """Average member entanglement of the decomposition ``U @ W.T``.

    ``W`` is (dA*dB) x r with columns ``sqrt(lambda_j) |e_j>``; each isometry
    ``U`` (K x r) yields unnormalised members ``w_i = sum_j U_ij W[:, j]``.
    """
    Wc = W.conj()

    def fun(U):
        V = U @ W.T  # K x D, rows are unnormalised members
        K = V.shape[0]
        M = V.reshape(K, dA, dB)
        sig = M @ M.conj().transpose(0, 2, 1)
        w, vec = np.linalg.eigh(sig)
        p = np.clip(w.sum(axis=1), 0.0, None)
        live = p > 1e-14
        w = np.clip(w, EIG_CLIP * 1e-3, None)
        q = w / np.where(live, p, 1.0)[:, None]
        # p_i S(sigma_i / p_i) in bits
        val = float(np.sum(np.where(live, -np.sum(w * np.log2(q), axis=1), 0.0)))
        # gradient of -Tr s ln s + Tr s ln Tr s is -ln(s / Tr s)
        G = -np.einsum("kab,kb,kcb->kac", vec, np.log(q), vec.conj()) / LN2
        G[~live] = 0.0
        g = (G @ M).reshape(K, -1)
        return val, g @ Wc

    return fun


def eof_upper_bound(
    rho: Register,
    restarts: int = 50,
    iters: int = 200,
    seed: SeedSpec | int = 0,
    members: int | None = None,
) -> EofResult:
    """Upper bound on the entanglement of formation (bits).

    Decompositions of ``rho`` with K members are isometries ``U`` (K x r)
    acting on the eigen-ensemble. Each restart starts from Haar-random mixing
    of the ensemble index and descends the average member entropy; the best
    decomposition over all restarts is returned.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    b = rho if rho.n_parties == 2 else _bipartite(rho)
    dA, dB = b.dims
    if b.is_pure:
        val = pure_entanglement(b, [0])
        dec = EnsembleDecomposition(np.ones(1), b.data[None, :].copy())
        return EofResult(val, dec, restarts, 0)
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    w, v = np.linalg.eigh(b.data)
    keep = w > 1e-13
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    r = len(w)
    W = v * np.sqrt(w)
    K = members if members is not None else min(2 * r, max(r, dA * dB))
    K = max(K, r)
    fun = _member_entropy_objective(W, dA, dB)
    best_val, best_U = np.inf, None
    # eigen-decomposition itself as a deterministic first start
    starts = [np.eye(K, r, dtype=complex)]
    for k in range(1, restarts):
        starts.append(haar_unitary(K, seed.child(k))[:, :r])
    for U0 in starts:
        U, val = _stiefel.minimize(fun, U0, iters=iters)
        if val < best_val:
            best_val, best_U = val, U
    V = best_U @ W.T
    p = np.sum(np.abs(V) ** 2, axis=1)
    live = p > 1e-14
    members_ = V[live] / np.sqrt(p[live])[:, None]
    dec = EnsembleDecomposition(p[live] / p[live].sum(), members_)
    # sanity: the decomposition must reproduce rho
    err = trace_distance(dec.reconstruct(), b.data)
    if err > 1e-7:
        log.warning("eof decomposition reconstruction error %.2e", err)
    log.debug("eof_upper_bound: %d restarts x %d iters, K=%d, value %.6f", restarts, iters, K, best_val)
    return EofResult(max(best_val, 0.0), dec, restarts, iters)


# one-way information --------------------------------------------------------


def _holevo_deficit_objective(rho_t: np.ndarray):
    """Average conditional entropy on B for rank-one POVM rows ``X``.

    ``rho_t[a, b, a', b']`` is the bipartite density tensor.
    """

    def fun(X):
        sig = np.einsum("ia,abcd,ic->ibd", X.conj(), rho_t, X, optimize=True)
        sig = (sig + sig.conj().transpose(0, 2, 1)) / 2
        w, vec = np.linalg.eigh(sig)
        p = np.clip(w.sum(axis=1), 0.0, None)
        live = p > 1e-14
        w = np.clip(w, EIG_CLIP * 1e-3, None)
        q = w / np.where(live, p, 1.0)[:, None]
        val = float(np.sum(np.where(live, -np.sum(w * np.log2(q), axis=1), 0.0)))
        G = -np.einsum("kab,kb,kcb->kac", vec, np.log(q), vec.conj()) / LN2
        G[~live] = 0.0
        # d Tr(G_i sigma_i) / d conj(X_ia) = sum G_i[d, b] X_ic rho[a, b, c, d]
        g = np.einsum("idb,ic,abcd->ia", G, X, rho_t, optimize=True)
        return val, g

    return fun


def oneway_info_lower_bound(
    rho: Register,
    restarts: int = 20,
    seed: SeedSpec | int = 0,
    iters: int = 200,
    outcomes: int | None = None,
) -> OnewayResult:
    """Lower bound on the one-way (A to B) information: the best Holevo
    quantity found over rank-one measurements on A. Starts from the
    computational basis and Haar-random bases, refined by descent."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    b = _bipartite(rho).to_mixed() if rho.n_parties != 2 else rho.to_mixed()
    dA, dB = b.dims
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rho_t = b.data.reshape(dA, dB, dA, dB)
    sB = entropy(partial_trace(b, [1]))
    K = dA if outcomes is None else max(outcomes, dA)
    fun = _holevo_deficit_objective(rho_t)
    starts = [np.eye(K, dA, dtype=complex)]
    for k in range(1, restarts):
        starts.append(haar_unitary(K, seed.child(k))[:, :dA])
    best_val, best_X = np.inf, None
    for X0 in starts:
        X, val = _stiefel.minimize(fun, X0, iters=iters)
        if val < best_val:
            best_val, best_X = val, X
    value = min(max(sB - best_val, 0.0), sB)
    return OnewayResult(value, PovmOnA(best_X), restarts)


# one-copy distillability ----------------------------------------------------


def _projected_min_pt(rho_t: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    """lambda_min of the partial transpose of the state compressed to
    span(X) (x) span(Y) and renormalised."""
    t = np.einsum("ai,bj,abcd,ck,dl->ijkl", X.conj(), Y.conj(), rho_t, X, Y, optimize=True)
    tr = np.einsum("ijij->", t).real
    if tr < 1e-14:
        return 0.0
    pt = t.transpose(0, 3, 2, 1).reshape(4, 4) / tr
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


def _qr_isometry(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    return q


def one_copy_distillable_search(
    rho: Register, restarts: int = 20, seed: SeedSpec | int = 0
) -> DistillabilityWitness:
    """Search rank-2 local projectors P, Q maximising the negativity of the
    projected two-qubit state. ``distillable=False`` is not a proof of
    undistillability."""
    from scipy.optimize import minimize

    b = rho.to_mixed() if rho.n_parties == 2 else _bipartite(rho).to_mixed()
    dA, dB = b.dims
    if dA < 2 or dB < 2:
        raise ValueError("need local dimensions >= 2")
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rho_t = b.data.reshape(dA, dB, dA, dB)
    nA, nB = 4 * dA, 4 * dB

    def unpack(x):
        za = (x[: 2 * dA] + 1j * x[2 * dA : nA]).reshape(dA, 2)
        zb = (x[nA : nA + 2 * dB] + 1j * x[nA + 2 * dB :]).reshape(dB, 2)
        return _qr_isometry(za), _qr_isometry(zb)

    def pack(X, Y):
        return np.concatenate([X.real.ravel(), X.imag.ravel(), Y.real.ravel(), Y.imag.ravel()])

    def obj(x):
        X, Y = unpack(x)
        if np.linalg.matrix_rank(X) < 2 or np.linalg.matrix_rank(Y) < 2:
            return 1.0
        return _projected_min_pt(rho_t, X, Y)

    starts = []
    # leading eigenvector's top two Schmidt vectors
    w, v = np.linalg.eigh(b.data)
    u, _, vh = np.linalg.svd(v[:, -1].reshape(dA, dB))
    starts.append(pack(u[:, :2], vh[:2].T))
    starts.append(pack(np.eye(dA, 2), np.eye(dB, 2)))
    rng = seed.rng()
    while len(starts) < restarts:
        za = complex_gaussian(rng, (dA, 2))
        zb = complex_gaussian(rng, (dB, 2))
        starts.append(pack(_qr_isometry(za), _qr_isometry(zb)))
    best = (np.inf, None)
    for x0 in starts[:max(restarts, 1)]:
        val0 = obj(x0)
        if val0 < best[0]:
            best = (val0, x0)
        res = minimize(obj, x0, method="Nelder-Mead" if x0.size <= 8 else "BFGS",
                       options={"maxiter": 400})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    X, Y = unpack(best[1])
    P = X @ X.conj().T
    Q = Y @ Y.conj().T
    lmin = best[0]
    return DistillabilityWitness(bool(lmin < -DISTILL_TOL), float(-lmin), P, Q)


# nearest maximally entangled state ------------------------------------------


def closest_max_entangled(phi: Register) -> tuple[Register, float]:
    """Maximally entangled state with the largest overlap with ``phi``:
    flatten the Schmidt coefficients, keep the Schmidt bases."""
    b = phi if phi.n_parties == 2 else _bipartite(phi)
    if not b.is_pure:
        raise ValueError("needs a pure bipartite state")
    dA, dB = b.dims
    if dA > dB:
        raise ValueError("expects dA <= dB")
    u, c, vh = np.linalg.svd(b.data.reshape(dA, dB))
    Phi = (u @ vh[:dA]).reshape(-1) / np.sqrt(dA)
    fid = float(np.sum(c) ** 2 / dA)
    return Register.pure(Phi / np.linalg.norm(Phi), (dA, dB)), min(fid, 1.0)
