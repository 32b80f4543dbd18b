"""Equilibrium of the game with a curved inner transform ``m``.

No closed form exists, so the equilibrium is computed by Gauss-Seidel best
response: each agent's scalar first-order condition

    m(x_i) - alpha_i sum_j g_ij m(x_j) = F(c / m'(x_i))

has a strictly increasing left side and strictly decreasing right side, so
it has one root in ``[0, A_hat]`` and sweeps contract to the unique fixed
point.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._roots import safeguarded_newton
from .exceptions import BoundViolationError, ConvergenceError, ExistenceError, ParameterError
from .game import EquilibriumParams, EquilibriumResult, foc_residuals, utilities
from .linear_game import solve_linear
from .network import as_network, as_profile, bonacich
from .utility import make_utility


@dataclass(frozen=True)
class FixedPointConfig:
    max_iterations: int = 10_000
    tol: float = 1e-10
    root_tol: float = 1e-12
    x0: Optional[np.ndarray] = None
    trace: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")
        if not (self.tol > 0 and self.root_tol > 0):
            raise ParameterError("tolerances must be positive")


@dataclass(frozen=True)
class ActionBound:
    A_hat: float
    threshold: float


def _bound_gap(A, alpha_max, params):
    inner = params.utility.inner
    with np.errstate(all="ignore"):
        return float(inner.m(A) * (1.0 - alpha_max) - params.gain_at(params.cost / inner.dm(A)))


def action_upper_bound(prof, params, safety=2.0, max_doublings=1000):
    """Upper bound on equilibrium actions.

    Finds the smallest ``A`` with ``m(A) (1 - max alpha) > F(c / m'(A))``
    (doubling, then bisection) and returns ``safety * A``.  When every
    opponent plays ``A`` or less, no best response exceeds it.
    """
    alpha = as_profile(prof).alpha
    amax = float(alpha.max())
    if amax >= 1.0:
        raise ExistenceError("need alpha_i < 1 for every agent")
    gap = lambda A: _bound_gap(A, amax, params)  # noqa: E731
    hi = 1.0
    k = 0
    while not gap(hi) > 0:
        hi *= 2.0
        k += 1
        if k > max_doublings or not np.isfinite(hi):
            raise ExistenceError("no finite action bound: m(A)(1 - max alpha) never exceeds F(c/m'(A))")
    lo = 0.0
    if hi == 1.0:
        lo = 0.5
        while gap(lo) > 0 and lo > 1e-300:
            hi, lo = lo, lo / 2.0
        if gap(lo) > 0:
            lo = 0.0
    else:
        lo = hi / 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return ActionBound(safety * hi, hi)


def _best_response_solver(params, root_tol):
    util = params.utility
    inner = util.inner
    c = params.cost
    d2f = util.d2f

    def solve(s, lo, hi, x0):
        def h(x):
            with np.errstate(all="ignore"):
                return float(inner.m(x) - s - util.inv_df(c / inner.dm(x)))

        if d2f is None:
            dh = None
        else:
            def dh(x):
                dm = inner.dm(x)
                y = c / dm
                with np.errstate(all="ignore"):
                    dF = 1.0 / d2f(util.inv_df(y))
                    return float(dm + dF * c * inner.second_derivative(x) / dm**2)

        return safeguarded_newton(h, lo, hi, dfun=dh, x0=x0, xtol=root_tol)

    return solve


def gauss_seidel_sweep(g, alpha, params, x, A_hat, solve=None, root_tol=1e-12):
    """One in-place best-response sweep over agents ``0..n-1``; returns ``x``."""
    solve = solve or _best_response_solver(params, root_tol)
    m = params.utility.inner.m
    mx = np.asarray(m(x), dtype=float)
    for i in range(x.size):
        s = alpha[i] * float(g[i] @ mx)
        try:
            xi = solve(s, 0.0, A_hat, x[i])
        except Exception as exc:
            raise BoundViolationError(
                f"agent {i}: best response not bracketed in [0, {A_hat!r}] ({exc})"
            ) from exc
        x[i] = xi
        mx[i] = m(xi)
    return x


def solve_nonlinear(net, prof, params=None, config=None):
    """Unique Nash equilibrium by Gauss-Seidel best response."""
    params = EquilibriumParams() if params is None else params
    config = FixedPointConfig() if config is None else config
    net = as_network(net)
    prof = as_profile(prof, net.n)
    g, alpha = net.weights, prof.alpha
    bound = action_upper_bound(prof, params)
    A_hat = bound.A_hat
    x = np.zeros(net.n) if config.x0 is None else np.array(config.x0, dtype=float)
    if x.shape != (net.n,):
        raise ParameterError(f"x0 must have length {net.n}")
    if np.any(x < 0) or np.any(x > A_hat):
        raise BoundViolationError(f"initial actions must lie in [0, {A_hat!r}]")
    solve = _best_response_solver(params, config.root_tol)
    trace = []
    change = np.inf
    for it in range(1, config.max_iterations + 1):
        prev = x.copy()
        gauss_seidel_sweep(g, alpha, params, x, A_hat, solve)
        change = float(np.max(np.abs(x - prev)))
        if config.trace:
            trace.append((it, change))
        if change < config.tol:
            break
    else:
        raise ConvergenceError(
            f"best response did not converge in {config.max_iterations} sweeps "
            f"(last sup change {change:.3e})", residual=change, iterations=config.max_iterations,
        )
    u = utilities(g, alpha, params, x)
    res = float(np.max(np.abs(foc_residuals(g, alpha, params, x))))
    cent = bonacich(net, prof)
    return EquilibriumResult(x, u, cent, "fixed-point", it, res, alpha=np.array(alpha), trace=trace)


def solve(net, prof, params=None, config=None, method="auto"):
    """Dispatch to the closed form when ``m`` is the identity."""
    params = EquilibriumParams() if params is None else params
    if method == "auto":
        method = "closed-form" if params.utility.inner.is_identity else "fixed-point"
    if method == "closed-form":
        return solve_linear(net, prof, params)
    if method == "fixed-point":
        return solve_nonlinear(net, prof, params, config)
    raise ParameterError(f"unknown method {method!r}")


@dataclass
class AlphaStaticReport:
    j: int
    delta: float
    dx: np.ndarray
    du: np.ndarray
    x_weakly_up: bool
    x_j_strictly_up: bool
    u_weakly_down: bool
    u_j_strictly_down: bool

    @property
    def holds(self):
        return self.x_weakly_up and self.x_j_strictly_up and self.u_weakly_down and self.u_j_strictly_down


def comparative_static_alpha(net, prof, params, j, delta, config=None, tol=1e-9):
    """Raise ``alpha_j`` by ``delta`` and compare the two equilibria."""
    net = as_network(net)
    prof = as_profile(prof, net.n)
    if delta < 0:
        raise ParameterError("delta must be non-negative")
    alpha2 = np.array(prof.alpha)
    alpha2[j] += delta
    if alpha2[j] >= 1.0:
        raise ExistenceError("alpha_j + delta must stay below 1")
    base = solve_nonlinear(net, prof, params, config)
    bumped = solve_nonlinear(net, alpha2, params, config)
    dx = bumped.x_star - base.x_star
    du = bumped.u_star - base.u_star
    return AlphaStaticReport(
        j, delta, dx, du,
        x_weakly_up=bool(np.all(dx >= -tol)),
        x_j_strictly_up=bool(dx[j] > 0),
        u_weakly_down=bool(np.all(du <= tol)),
        u_j_strictly_down=bool(du[j] < 0),
    )


@dataclass
class CostStaticReport:
    delta: float
    x_star: np.ndarray
    dx_dc: np.ndarray
    du: np.ndarray
    sensitivity_bound: np.ndarray
    condition_holds: np.ndarray
    x_strictly_down: bool
    condition_implies_gain: bool


def comparative_static_cost(net, prof, params, delta, config=None):
    """Raise the marginal cost by ``delta`` and test the sensitivity condition.

    Where ``dx_i/dc < min(-x_i / c, m'(x_i) / (c m''(x_i)))`` the agent's
    equilibrium utility should rise with the cost.
    """
    net = as_network(net)
    prof = as_profile(prof, net.n)
    c = params.cost
    if c + delta <= 0:
        raise ParameterError("cost + delta must stay positive")
    base = solve_nonlinear(net, prof, params, config)
    moved = solve_nonlinear(net, prof, params.replace(cost=c + delta), config)
    x = base.x_star
    dx_dc = (moved.x_star - x) / delta if delta else np.zeros_like(x)
    inner = params.utility.inner
    d2m = np.array([inner.second_derivative(xi) for xi in x])
    dm = np.asarray(inner.dm(x), dtype=float) * np.ones_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        curv = np.where(d2m < 0, dm / (c * np.where(d2m < 0, d2m, -1.0)), -np.inf)
    bound = np.minimum(-x / c, curv)
    cond = dx_dc < bound
    du = moved.u_star - base.u_star
    return CostStaticReport(
        delta, x, dx_dc, du, bound, cond,
        x_strictly_down=bool(np.all(dx_dc < 0)) if delta > 0 else False,
        condition_implies_gain=bool(np.all(du[cond] > 0)),
    )


class ConsumptionGame(BaseEstimator):
    """Equilibrium consumption on a reference network.

    Parameters
    ----------
    cost : float
        Marginal cost of consumption ``c``.
    link_benefit : float
        Common benefit ``b`` per unit of comparison weight.
    utility : str or UtilitySpec
        Sub-utility family (``"sqrt"`` gives ``f(z) = 2 sqrt(z)``).
    inner : str or None
        Inner transform ``m``; ``None`` keeps the utility's own (identity).
    solver : {"auto", "closed-form", "fixed-point"}
    max_iter, tol : fixed-point settings.

    Attributes
    ----------
    x_star_, u_star_, centrality_ : ndarray of shape (n,)
    n_iter_ : int
    residual_ : float
    """

    def __init__(self, cost=1.0, link_benefit=0.0, utility="sqrt", inner=None,
                 solver="auto", max_iter=10_000, tol=1e-10):
        self.cost = cost
        self.link_benefit = link_benefit
        self.utility = utility
        self.inner = inner
        self.solver = solver
        self.max_iter = max_iter
        self.tol = tol

    def _params(self):
        util = make_utility(self.utility, inner=self.inner)
        return EquilibriumParams(self.cost, self.link_benefit, util)

    def fit(self, G, alpha):
        res = solve(G, alpha, self._params(),
                    FixedPointConfig(max_iterations=self.max_iter, tol=self.tol), self.solver)
        self.result_ = res
        self.x_star_ = res.x_star
        self.u_star_ = res.u_star
        self.centrality_ = np.asarray(res.centrality.centrality)
        self.n_iter_ = res.iterations
        self.residual_ = res.residual
        return self
