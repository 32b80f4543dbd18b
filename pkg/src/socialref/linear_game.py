"""Closed-form equilibrium when consumption enters the comparison linearly.

With ``m(x) = x`` every first-order condition reads
``x_i - alpha_i sum_j g_ij x_j = F(c)``, so ``x* = F(c) * C_b``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ExistenceError, ParameterError
from .game import EquilibriumParams, EquilibriumResult, foc_residuals, utilities
from .network import as_network, as_profile, bonacich, uncorrelated_centrality


def solve_linear(net, prof, params=None):
    """Nash equilibrium ``x* = F(c) C_b`` for identity inner transform."""
    params = EquilibriumParams() if params is None else params
    if not params.utility.inner.is_identity:
        raise ParameterError("closed form needs m(x) = x; use solve_nonlinear instead")
    net = as_network(net)
    prof = as_profile(prof, net.n)
    cent = bonacich(net, prof)
    x = params.gain_at(params.cost) * np.asarray(cent.centrality)
    g, alpha = net.weights, prof.alpha
    u = utilities(g, alpha, params, x)
    res = float(np.max(np.abs(foc_residuals(g, alpha, params, x))))
    return EquilibriumResult(x, u, cent, "closed-form", 0, res, alpha=np.array(alpha))


def uncorrelated_consumption(alpha, params):
    """Equilibrium consumption under the uncorrelated case, no network needed."""
    return params.gain_at(params.cost) * uncorrelated_centrality(alpha)


@dataclass
class DominanceReport:
    grid: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    cdf_a: np.ndarray
    cdf_b: np.ndarray
    icdf_a: np.ndarray
    icdf_b: np.ndarray
    b_fosd_a: bool
    a_fosd_b: bool
    b_sosd_a: bool
    a_sosd_b: bool


def _ecdf(sample, grid):
    s = np.sort(sample)
    return np.searchsorted(s, grid, side="right") / s.size


def _integrated_ecdf(sample, grid):
    # int_{-inf}^{t} F(s) ds = E[(t - X)^+]
    return np.maximum(grid[:, None] - sample[None, :], 0.0).mean(axis=1)


def stochastic_dominance_check(alpha_a, alpha_b, params=None, grid_size=512, tol=1e-12):
    """Compare equilibrium consumption distributions of two strength samples.

    Consumption is computed with the network-free formula.  ``b_fosd_a``
    means the CDF of sample B lies weakly below that of A everywhere on a
    shared ``grid_size``-point grid; ``b_sosd_a`` compares integrated CDFs,
    so B is weakly less risky in the second-order sense.
    """
    params = EquilibriumParams() if params is None else params
    alpha_a = np.asarray(alpha_a, dtype=float)
    alpha_b = np.asarray(alpha_b, dtype=float)
    for name, a in (("A", alpha_a), ("B", alpha_b)):
        if a.size and a.mean() >= 1.0:
            raise ExistenceError(f"sample {name} has mean reference strength >= 1")
    x_a = uncorrelated_consumption(alpha_a, params)
    x_b = uncorrelated_consumption(alpha_b, params)
    pooled = np.concatenate([x_a, x_b])
    grid = np.linspace(pooled.min(), pooled.max(), grid_size)
    cdf_a, cdf_b = _ecdf(x_a, grid), _ecdf(x_b, grid)
    icdf_a, icdf_b = _integrated_ecdf(x_a, grid), _integrated_ecdf(x_b, grid)
    scale = max(1.0, float(np.abs(grid).max()))
    return DominanceReport(
        grid, x_a, x_b, cdf_a, cdf_b, icdf_a, icdf_b,
        b_fosd_a=bool(np.all(cdf_b <= cdf_a + tol)),
        a_fosd_b=bool(np.all(cdf_a <= cdf_b + tol)),
        b_sosd_a=bool(np.all(icdf_b <= icdf_a + tol * scale)),
        a_sosd_b=bool(np.all(icdf_a <= icdf_b + tol * scale)),
    )
