import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialref.exceptions import ParameterError
from socialref.network import bonacich
from socialref.portfolio import (PortfolioAllocation, PortfolioProblem, QuadraticParams,
                                 best_response_numeric, dara_comparative_static, foc_residuals,
                                 is_dara, lambda_closed_form, quadratic_coefficients,
                                 solve_portfolio)
from socialref.utility import make_utility

from conftest import random_instance

RETURNS = (0.7, 1.1, 1.5)
PROBS = (0.25, 0.5, 0.25)


def quad_problem(rng):
    quad = QuadraticParams(0.0, rng.uniform(0.5, 2.0), -rng.uniform(0.005, 0.05))
    up = rng.uniform(1.5, 1.8)
    problem = PortfolioProblem(rng.uniform(5, 20), np.array([rng.uniform(0.5, 0.9), 1.05, up]),
                               np.array([0.3, 0.4, 0.3]), quad.utility())
    return problem, quad


def test_closed_form_matches_per_agent_optimizer(rng):
    for _ in range(5):
        problem, quad = quad_problem(rng)
        net, alpha = random_instance(rng, n=10, alpha_max=0.7)
        lam = lambda_closed_form(problem, quad, net, alpha)
        s = net.weights @ lam
        br = np.array([best_response_numeric(problem, alpha[i], s[i]) for i in range(10)])
        np.testing.assert_allclose(br, lam, atol=1e-6)
        assert np.max(np.abs(foc_residuals(problem, net, alpha, lam))) < 1e-9


def test_closed_form_matches_fixed_point(rng):
    problem, quad = quad_problem(rng)
    net, alpha = random_instance(rng, n=12)
    lam = lambda_closed_form(problem, quad, net, alpha)
    np.testing.assert_allclose(solve_portfolio(problem, net, alpha).lambda_star, lam, atol=1e-9)


def test_closed_form_centrality_form(rng):
    problem, quad = quad_problem(rng)
    net, alpha = random_instance(rng, n=9)
    k1, k2 = quadratic_coefficients(problem, quad)
    cb = bonacich(net, alpha).C_b
    np.testing.assert_allclose(lambda_closed_form(problem, quad, net, alpha), (k1 + k2) * cb - k2, atol=1e-12)


def test_no_comparison_is_textbook_share():
    problem = PortfolioProblem(10.0, np.array(RETURNS), np.array(PROBS), QuadraticParams().utility())
    lam = best_response_numeric(problem, 0.0, 0.0)
    rp = problem.premium
    # maximise E[a1 z + a2 z^2], z = w(1 + lam rp)
    a1, a2, w = 1.0, -0.05, 10.0
    Erp, Erp2 = problem.probs @ rp, problem.probs @ rp**2
    expected = -(a1 + 2 * a2 * w) * Erp / (2 * a2 * w * Erp2)
    assert lam == pytest.approx(expected, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.02, 0.1))
def test_dara_static(seed, delta):
    rng = np.random.default_rng(seed)
    util = make_utility("crra", gamma=rng.uniform(1.5, 4.0), shift=rng.uniform(0.5, 1.5))
    problem = PortfolioProblem(10.0, np.array(RETURNS), np.array(PROBS), util)
    net, alpha = random_instance(rng, n=8, alpha_max=0.6)
    j = int(rng.integers(8))
    rep = dara_comparative_static(problem, net, alpha, j, delta)
    assert rep.own_down and rep.others_weakly_down, rep.dlam


def test_quadratic_static_inverted(rng):
    problem, quad = quad_problem(rng)
    net, alpha = random_instance(rng, n=8, alpha_max=0.6)
    rep = dara_comparative_static(problem, net, alpha, 2, 0.1, check_dara=False)
    assert rep.dlam[2] > 0 and np.all(rep.dlam >= -1e-9)


def test_pure_crra_no_effect(rng):
    problem = PortfolioProblem(10.0, np.array(RETURNS), np.array(PROBS), make_utility("crra", gamma=2.0))
    net, alpha = random_instance(rng, n=6, alpha_max=0.6)
    rep = dara_comparative_static(problem, net, alpha, 0, 0.1)
    np.testing.assert_allclose(rep.dlam, 0.0, atol=1e-8)


def test_dara_detection():
    z = np.linspace(1.0, 5.0, 20)
    assert is_dara(make_utility("crra", gamma=2.0, shift=0.5), z)
    assert not is_dara(make_utility("cara", a=1.0), z)
    assert not is_dara(QuadraticParams().utility(), z)


def test_problem_validation():
    with pytest.raises(ParameterError):
        PortfolioProblem(10.0, np.array([1.1, 1.2]), np.array([0.5, 0.5]))  # no downside
    with pytest.raises(ParameterError):
        PortfolioProblem(10.0, np.array([0.5, 1.2]), np.array([0.5, 0.5]))  # mean below r_f
    with pytest.raises(ParameterError):
        QuadraticParams(a2=0.1)


def test_estimator(rng):
    net, alpha = random_instance(rng, n=7)
    est = PortfolioAllocation().fit(net.weights, alpha)
    problem = PortfolioProblem(10.0, np.array(RETURNS), np.array(PROBS), QuadraticParams().utility())
    np.testing.assert_allclose(est.lambda_, lambda_closed_form(problem, QuadraticParams(), net, alpha))
