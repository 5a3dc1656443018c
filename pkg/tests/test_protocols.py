import math

import numpy as np
import pytest

from genent.measures import pure_entanglement
from genent.protocols import (
    BudgetExceeded,
    _entropy_objective,
    certify_subspace,
    locking_experiment,
    multiparty_distill,
    sdc_encode,
    sdc_run,
    sphere_net,
    sphere_net_size,
)
from genent.sampler import SeedSpec, SubspaceIsometry, complex_gaussian, haar_pure, random_subspace
from genent.states import Register, ghz, max_entangled, w_state


def iso(cols, dims):
    return SubspaceIsometry(dims, np.asarray(cols, dtype=complex).T)


E00 = np.array([1, 0, 0, 0])
E11 = np.array([0, 0, 0, 1])


def test_certify_single_column_is_exact():
    V = random_subspace(3, 3, 1, SeedSpec(2))
    c = certify_subspace(V, "net", epsilon=0.9)
    assert c.certified
    assert c.min_entanglement_estimate == pytest.approx(pure_entanglement(Register.pure(V.columns[:, 0], (3, 3))))


def test_minimize_finds_product_state_in_span():
    V = iso([E00, E11], (2, 2))
    c = certify_subspace(V, "minimize", seed=1, restarts=5)
    assert not c.certified
    assert c.min_entanglement_estimate < 1e-6


def test_bell_pair_span_contains_product_states():
    b1 = (E00 + E11) / math.sqrt(2)
    b2 = (E00 - E11) / math.sqrt(2)
    V = iso([b1, b2], (2, 2))
    c = certify_subspace(V, "minimize", seed=2, restarts=5)
    assert c.min_entanglement_estimate < 1e-6
    assert abs(abs(np.vdot(E00, c.argmin)) ** 2 + abs(np.vdot(E11, c.argmin)) ** 2 - 1) < 1e-9


def test_net_refuses_over_budget_with_count():
    V = random_subspace(3, 3, 3, SeedSpec(0))
    need = sphere_net_size(3, 0.3)
    with pytest.raises(BudgetExceeded, match=str(need)):
        certify_subspace(V, "net", epsilon=0.3, budget=1000)


def test_net_is_a_half_epsilon_cover():
    eps = 0.6
    net = sphere_net(2, eps)
    assert len(net) == sphere_net_size(2, eps)
    assert np.allclose(np.linalg.norm(net, axis=1), 1)
    rng = SeedSpec(5).rng()
    probes = complex_gaussian(rng, (500, 2))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    d = np.linalg.norm(probes[:, None, :] - net[None, :, :], axis=2).min(axis=1)
    assert d.max() <= eps / 2 + 1e-12


def test_net_bound_below_minimiser():
    V = random_subspace(3, 4, 2, SeedSpec(7))
    net = certify_subspace(V, "net", epsilon=0.5)
    mn = certify_subspace(V, "minimize", seed=3, restarts=10)
    assert net.certified
    assert net.min_entanglement_estimate <= mn.min_entanglement_estimate + 1e-9
    assert net.net_minimum >= mn.min_entanglement_estimate - 1e-6
    assert mn.min_entanglement_estimate <= math.log2(3) + 1e-9


def test_unknown_mode():
    with pytest.raises(ValueError, match="mode"):
        certify_subspace(random_subspace(2, 2, 2, SeedSpec(0)), "exhaustive")


@pytest.mark.parametrize("seed", range(5))
def test_entropy_gradient_matches_central_differences(seed):
    V = random_subspace(3, 4, 3, SeedSpec(seed, 0)).columns
    fun = _entropy_objective(V, 3, 4)
    rng = SeedSpec(seed, 1).rng()
    c = complex_gaussian(rng, (3, 1))
    c /= np.linalg.norm(c)
    h = complex_gaussian(rng, (3, 1))
    _, g = fun(c)
    step = 1e-5
    fd = (fun(c + step * h)[0] - fun(c - step * h)[0]) / (2 * step)
    analytic = 2 * np.real(np.vdot(g, h))
    assert analytic == pytest.approx(fd, rel=1e-4, abs=1e-9)


def test_distill_two_parties_is_identity_step():
    phi = Register.pure(haar_pure(12, SeedSpec(4)), (3, 4))
    outs, omitted = multiparty_distill(phi, (0, 1))
    assert len(outs) == 1 and omitted == 0
    assert outs[0].probability == pytest.approx(1)
    assert outs[0].entanglement == pytest.approx(pure_entanglement(phi))


def test_distill_ghz_collapses_to_products():
    outs, omitted = multiparty_distill(ghz(3), (0, 1))
    assert omitted == 0 and [o.label for o in outs] == [(0,), (1,)]
    assert all(o.probability == pytest.approx(0.5) for o in outs)
    assert np.allclose(np.abs(outs[0].post_state.data), [1, 0, 0, 0])
    assert np.allclose(np.abs(outs[1].post_state.data), [0, 0, 0, 1])
    assert all(o.entanglement == pytest.approx(0, abs=1e-12) for o in outs)


def test_distill_w_state():
    outs, _ = multiparty_distill(w_state(3), (0, 1))
    o0, o1 = outs
    assert o0.probability == pytest.approx(2 / 3) and o0.entanglement == pytest.approx(1)
    assert o1.probability == pytest.approx(1 / 3) and o1.entanglement == pytest.approx(0, abs=1e-12)


def test_distill_omits_zero_probability_outcomes():
    phi = ghz(4, 3)
    outs, omitted = multiparty_distill(phi, (1, 3))
    assert len(outs) == 3 and omitted == 6


def test_distill_probabilities_and_entanglement_range():
    phi = Register.pure(haar_pure(3**4, SeedSpec(8)), (3,) * 4)
    outs, omitted = multiparty_distill(phi, (2, 0))
    assert sum(o.probability for o in outs) == pytest.approx(1, abs=1e-8)
    assert all(o.entanglement <= math.log2(3) + 1e-12 for o in outs)
    with pytest.raises(ValueError):
        multiparty_distill(phi, (1, 1))


def test_sdc_reference_needs_identity():
    V = iso([max_entangled(2).data, [0, 1, 0, 0]], (2, 2))
    U = sdc_encode(max_entangled(2), V)
    assert np.allclose(U / U[0, 0], np.eye(2))


def test_sdc_exact_for_maximally_entangled_targets():
    phi = (np.array([0, 1, 1, 0]) + 1j * np.array([1, 0, 0, 1])) / 2
    V = iso([phi, np.array([0, 1, -1, 0]) / math.sqrt(2)], (2, 2))
    target = Register.pure(phi, (2, 2))
    U = sdc_encode(target, V)
    assert np.allclose(U.conj().T @ U, np.eye(2))
    sent = (max_entangled(2).data.reshape(2, 2) @ U.T).reshape(-1)
    assert abs(np.vdot(phi, sent)) ** 2 == pytest.approx(1)
    _, f = sdc_run(V, target)
    assert f == pytest.approx(1, abs=1e-8)


def test_sdc_whole_space_matches_encoding_overlap():
    V = SubspaceIsometry((2, 4), np.eye(8, dtype=complex))
    target = Register.pure(haar_pure(8, SeedSpec(3)), (2, 4))
    from genent.measures import closest_max_entangled

    _, F = closest_max_entangled(target)
    _, f = sdc_run(V, target)
    assert f == pytest.approx(F)


def test_sdc_rejects_target_outside_subspace():
    V = iso([E00], (2, 2))
    with pytest.raises(ValueError, match="outside"):
        sdc_encode(max_entangled(2), V)


def test_sdc_fidelity_chain_on_certified_subspace():
    V = random_subspace(4, 16, 2, SeedSpec(12))
    cert = certify_subspace(V, "minimize", seed=1, restarts=10)
    delta = cert.deficit
    for k in range(20):
        t = Register.pure(V.columns @ haar_pure(2, SeedSpec(13, k)), (4, 16))
        _, f = sdc_run(cert, t)
        assert f >= 1 - 2 * math.sqrt(delta) - 1e-9


def test_locking_traced_zero_keeps_value():
    (row,) = locking_experiment(2, 0, 1, seed=3, restarts=2)
    assert row.before == row.after and row.gap == 0


def test_locking_single_qubit_pair():
    (row,) = locking_experiment(1, 1, 1, seed=4, rank=1, restarts=2)
    assert row.before > 0 and row.after == 0


def test_locking_rejects_too_many_traced():
    with pytest.raises(ValueError):
        locking_experiment(2, 3, 1, seed=0)
