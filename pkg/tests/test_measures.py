import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genent.linalg import trace_distance
from genent.measures import (
    closest_max_entangled,
    coherent_information,
    entropy,
    eof_upper_bound,
    is_npt,
    mutual_information,
    one_copy_distillable_search,
    oneway_info_lower_bound,
    pure_entanglement,
    purity_separable,
)
from genent.sampler import SeedSpec, haar_pure, random_mixed
from genent.states import Register, basis_state, max_entangled

from oracles import h2, wootters_eof

BELL = max_entangled(2)
CLASSICAL = Register.mixed(np.diag([0.5, 0, 0, 0.5]), (2, 2))
MM4 = Register.mixed(np.eye(4) / 4, (2, 2))


def schmidt_state(c):
    c = np.asarray(c, dtype=float)
    d = len(c)
    v = np.zeros(d * d)
    for i, x in enumerate(c):
        v[i * d + i] = x
    return Register.pure(v, (d, d))


def product(dA, dB, seed):
    a = random_mixed(dA, 2, SeedSpec(seed, 0))
    b = random_mixed(dB, 2, SeedSpec(seed, 1))
    return Register.mixed(np.kron(a, b), (dA, dB))


def test_entropy_examples():
    assert entropy(BELL) == pytest.approx(0, abs=1e-12)
    assert entropy(MM4) == pytest.approx(2)
    assert entropy(np.diag([0.5, 0.25, 0.25])) == pytest.approx(1.5)


def test_pure_entanglement_examples():
    assert pure_entanglement(basis_state((0, 0), (2, 3))) == pytest.approx(0, abs=1e-12)
    assert pure_entanglement(max_entangled(3)) == pytest.approx(math.log2(3))
    st_ = schmidt_state([math.sqrt(0.9), math.sqrt(0.1)])
    assert pure_entanglement(st_) == pytest.approx(h2(0.9))
    assert pure_entanglement(st_) == pytest.approx(0.469, abs=1e-3)


def test_mutual_information_examples():
    assert mutual_information(product(2, 3, 0)) == pytest.approx(0, abs=1e-9)
    assert mutual_information(BELL) == pytest.approx(2)
    assert mutual_information(CLASSICAL) == pytest.approx(1)


def test_coherent_information_examples():
    assert coherent_information(max_entangled(3)) == pytest.approx(math.log2(3))
    mm = Register.mixed(np.eye(6) / 6, (2, 3))
    assert coherent_information(mm) == pytest.approx(-1)
    assert coherent_information(basis_state((1, 0), (2, 2))) == pytest.approx(0, abs=1e-12)


def test_npt_examples():
    flag, lmin = is_npt(BELL.to_mixed())
    assert flag and lmin == pytest.approx(-0.5)
    mix = Register.mixed(0.5 * np.kron(np.diag([1, 0]), np.diag([1, 0])) + 0.5 * np.eye(4) / 4, (2, 2))
    flag, lmin = is_npt(mix)
    assert not flag and lmin >= 0
    flag, lmin = is_npt(MM4)
    assert not flag and lmin == pytest.approx(0.25)


def test_purity_separable_examples():
    assert purity_separable(MM4)
    assert not purity_separable(BELL.to_mixed())
    # purity exactly 1/3 on d = 4 sits on the (inclusive) boundary
    rho = np.diag([1 / 2, 1 / 6, 1 / 6, 1 / 6])
    assert np.sum(rho**2) == pytest.approx(1 / 3)
    assert purity_separable(Register.mixed(rho, (2, 2)))


def test_eof_pure_is_exact():
    r = Register.pure(haar_pure(12, SeedSpec(1)), (3, 4))
    assert eof_upper_bound(r).value == pure_entanglement(r)


def test_eof_rejects_zero_restarts():
    with pytest.raises(ValueError):
        eof_upper_bound(CLASSICAL, restarts=0)


@pytest.mark.parametrize("p", [0.1, 0.4, 0.7, 0.95])
def test_eof_werner_like_bell_diagonal(p):
    psi = BELL.density()
    q = (1 - p) / 3
    others = [np.array([1, 0, 0, -1]), np.array([0, 1, 1, 0]), np.array([0, 1, -1, 0])]
    rho = p * psi + sum(q * np.outer(v, v) / 2 for v in others)
    r = Register.mixed(rho, (2, 2))
    res = eof_upper_bound(r, restarts=5, seed=SeedSpec(int(p * 100)))
    oracle = wootters_eof(rho)
    assert oracle - 1e-6 <= res.value <= oracle + 0.02


def test_eof_separable_product_mixture():
    rng = SeedSpec(3)
    rho = sum(
        0.25 * np.kron(random_mixed(2, 1, rng.child(k, 0)), random_mixed(2, 1, rng.child(k, 1)))
        for k in range(4)
    )
    res = eof_upper_bound(Register.mixed(rho, (2, 2)), restarts=5, seed=1)
    assert res.value <= 0.02
    assert np.allclose(res.decomposition.reconstruct(), rho, atol=1e-7)


def test_oneway_examples():
    assert oneway_info_lower_bound(product(2, 2, 5), restarts=3).value == pytest.approx(0, abs=1e-6)
    assert oneway_info_lower_bound(max_entangled(3), restarts=3).value == pytest.approx(math.log2(3), abs=1e-6)
    assert oneway_info_lower_bound(CLASSICAL, restarts=3).value == pytest.approx(1, abs=0.01)


def test_oneway_never_exceeds_entropy_of_b():
    r = Register.mixed(random_mixed(6, 3, SeedSpec(11)), (2, 3))
    res = oneway_info_lower_bound(r, restarts=3)
    sB = entropy(np.trace(r.data.reshape(2, 3, 2, 3), axis1=0, axis2=2))
    assert 0 <= res.value <= sB + 1e-12
    M = res.povm.elements
    assert np.allclose(M.sum(axis=0), np.eye(2), atol=1e-8)


def test_one_copy_examples():
    w = one_copy_distillable_search(BELL.to_mixed(), restarts=4)
    assert w.distillable and w.negativity == pytest.approx(0.5, abs=1e-6)
    w = one_copy_distillable_search(Register.mixed(np.eye(9) / 9, (3, 3)), restarts=3)
    assert not w.distillable
    P = w.P
    assert np.allclose(P @ P, P, atol=1e-8) and np.trace(P).real == pytest.approx(2)


@pytest.mark.slow
def test_one_copy_qutrit_max_entangled():
    assert one_copy_distillable_search(max_entangled(3).to_mixed(), restarts=3).distillable


def test_closest_max_entangled():
    phi = Register.pure(haar_pure(8, SeedSpec(2)), (2, 4))
    Phi, F = closest_max_entangled(phi)
    c = np.linalg.svd(phi.data.reshape(2, 4), compute_uv=False)
    assert F == pytest.approx(np.sum(c) ** 2 / 2)
    assert abs(np.vdot(Phi.data, phi.data)) ** 2 == pytest.approx(F)
    assert pure_entanglement(Phi) == pytest.approx(1)
    Phi2, F2 = closest_max_entangled(BELL)
    assert F2 == pytest.approx(1)
    with pytest.raises(ValueError):
        closest_max_entangled(Register.pure(haar_pure(6, SeedSpec(0)), (3, 2)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 0.3))
def test_entropy_lipschitz_in_euclidean_norm(seed, scale):
    dA = dB = 4
    v = haar_pure(16, SeedSpec(seed, 0))
    w = v + scale * haar_pure(16, SeedSpec(seed, 1))
    w /= np.linalg.norm(w)
    dS = abs(pure_entanglement(Register.pure(v, (4, 4))) - pure_entanglement(Register.pure(w, (4, 4))))
    assert dS <= math.sqrt(8) * math.log2(dA) * np.linalg.norm(v - w) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_closest_fidelity_chain(seed):
    phi = Register.pure(haar_pure(12, SeedSpec(seed)), (3, 4))
    Phi, F = closest_max_entangled(phi)
    delta = math.log2(3) - pure_entanglement(phi)
    assert F >= 1 - math.sqrt(2 * delta) - 1e-9
    assert trace_distance(phi.density(), Phi.density()) <= 2 * math.sqrt(1 - F) + 1e-9
