import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from socialref.exceptions import ExistenceError, ParameterError
from socialref.network import (BonacichCentrality, WeightedNetwork, bonacich, bonacich_neumann,
                               check_uncorrelated, erdos_renyi_row_normalized, neumann_tail_bound,
                               uncorrelated_centrality)

from conftest import random_instance


def test_two_agent_closed_form():
    g = np.array([[0.0, 1.0], [1.0, 0.0]])
    a = np.array([0.5, 0.2])
    # x0 = 1 + .5 x1, x1 = 1 + .2 x0
    x1 = (1 + 0.2) / (1 - 0.1)
    x0 = 1 + 0.5 * x1
    np.testing.assert_allclose(bonacich(g, a).C_b, [x0, x1], rtol=1e-14)


def test_zero_alpha_gives_identity():
    net = erdos_renyi_row_normalized(12, 0.3, seed=1)
    res = bonacich(net, np.zeros(12))
    np.testing.assert_allclose(res.B, np.eye(12))
    np.testing.assert_allclose(res.C_b, 1.0)


def test_resolvent_identity(rng):
    net, alpha = random_instance(rng)
    B = bonacich(net, alpha).B
    A = np.eye(net.n) - alpha[:, None] * net.weights
    np.testing.assert_allclose(A @ B, np.eye(net.n), atol=1e-12)


def test_neumann_within_tail_bound(rng):
    for _ in range(20):
        net, alpha = random_instance(rng, alpha_max=0.8)
        exact = bonacich(net, alpha).C_b
        approx = bonacich_neumann(net, alpha, 60)
        assert np.max(np.abs(exact - approx)) <= neumann_tail_bound(alpha, 60) + 1e-13


def test_uncorrelated_constant_alpha(rng):
    for a in (0.1, 0.5, 0.9):
        net, _ = random_instance(rng)
        alpha = np.full(net.n, a)
        assert check_uncorrelated(net, alpha).holds
        np.testing.assert_allclose(bonacich(net, alpha).C_b, uncorrelated_centrality(alpha), atol=1e-9)


def test_uncorrelated_complete_graph_heterogeneous():
    # on the complete graph g @ alpha differs from alpha_bar, so the identity only
    # holds for constant profiles; check the check itself
    n = 6
    g = (np.ones((n, n)) - np.eye(n)) / (n - 1)
    alpha = np.linspace(0.1, 0.6, n)
    assert not check_uncorrelated(g, alpha).holds


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 40), elements=st.floats(0, 3, allow_nan=False)))
def test_existence_iff_mean_below_one(alpha):
    if alpha.mean() < 1:
        c = uncorrelated_centrality(alpha)
        assert np.all(c >= 1) and np.all(np.isfinite(c))
    else:
        with pytest.raises(ExistenceError):
            uncorrelated_centrality(alpha)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 25), st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
def test_generator_row_stochastic(n, p, seed):
    net, redraws = erdos_renyi_row_normalized(n, p, seed=seed, return_redraws=True)
    g = net.weights
    np.testing.assert_allclose(g.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.diag(g) == 0) and redraws >= 0
    again = erdos_renyi_row_normalized(n, p, seed=seed)
    assert again == net


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.95))
def test_centrality_monotone_in_alpha(seed, bump):
    rng = np.random.default_rng(seed)
    net, alpha = random_instance(rng, n=8, alpha_max=0.9)
    j = int(rng.integers(8))
    a2 = alpha.copy()
    a2[j] = max(alpha[j], min(bump, 0.95))
    c0, c1 = bonacich(net, alpha).C_b, bonacich(net, a2).C_b
    assert np.all(c1 >= c0 - 1e-12)


def test_alpha_at_one_rejected():
    g = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ExistenceError):
        bonacich(g, [1.0, 1.0])


def test_bad_weights_rejected():
    with pytest.raises(ParameterError):
        WeightedNetwork(np.array([[0.0, 0.5], [1.0, 0.0]]))
    with pytest.raises(ParameterError):
        WeightedNetwork(np.array([[0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(ParameterError):
        erdos_renyi_row_normalized(5, 0.0)


def test_from_adjacency():
    net = WeightedNetwork.from_adjacency([[0, 2, 2], [1, 0, 0], [1, 1, 0]])
    np.testing.assert_allclose(net.weights[0], [0, 0.5, 0.5])
    with pytest.raises(ParameterError):
        WeightedNetwork.from_adjacency([[0, 1], [0, 0]])


def test_estimator(rng):
    net, alpha = random_instance(rng, n=10)
    est = BonacichCentrality().fit(net.weights, alpha)
    np.testing.assert_allclose(est.transform(net.weights, alpha), bonacich(net, alpha).C_b)
    neu = BonacichCentrality(method="neumann", n_terms=200).fit_transform(net.weights, alpha)
    np.testing.assert_allclose(neu, est.centrality_, atol=1e-10)
    assert "method" in est.get_params()
