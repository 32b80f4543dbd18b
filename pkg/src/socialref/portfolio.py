"""Equity allocation when final consumption is compared with peers'.

Agent ``i`` puts a share ``lambda_i`` of wealth ``w`` in equity and the
rest in debt, consumes ``x_i = w (r_f + lambda_i r_p)`` and values the gain
``z_i = x_i - alpha_i sum_j g_ij x_j``.  With ``sum_j g_ij = 1`` this is::

    z_i = w r_f (1 - alpha_i) + w r_p (lambda_i - alpha_i sum_j g_ij lambda_j)

Returns live on a finite support, so every expectation is an exact sum.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
from sklearn.base import BaseEstimator

from ._roots import safeguarded_newton
from .exceptions import ConvergenceError, InfeasibleModelError, ParameterError
from .io import write_table
from .network import as_network, as_profile, bonacich
from .utility import UtilitySpec, make_utility, utility_from_dict
from .validation import check_probability_vector


@dataclass(frozen=True)
class QuadraticParams:
    a0: float = 0.0
    a1: float = 1.0
    a2: float = -0.05

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 < 0):
            raise ParameterError("quadratic utility needs a1 > 0 and a2 < 0")

    def utility(self):
        return make_utility("quadratic", a0=self.a0, a1=self.a1, a2=self.a2)


@dataclass(frozen=True)
class PortfolioProblem:
    """Wealth, gross equity returns on a finite support and the gain utility."""

    wealth: float
    returns: np.ndarray
    probs: np.ndarray
    utility: UtilitySpec = field(default_factory=lambda: QuadraticParams().utility())
    r_f: float = 1.0

    def __post_init__(self):
        if not self.wealth > 0:
            raise ParameterError("wealth must be positive")
        r = np.asarray(self.returns, dtype=float)
        p = check_probability_vector(self.probs)
        if r.shape != p.shape:
            raise ParameterError("returns and probabilities must have the same length")
        if isinstance(self.utility, str):
            object.__setattr__(self, "utility", make_utility(self.utility))
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "probs", p)
        if not float(p @ r) > self.r_f:
            raise ParameterError(f"expected equity return {float(p @ r)!r} must exceed r_f = {self.r_f!r}")
        if not np.any((r - self.r_f < 0) & (p > 0)):
            raise ParameterError("some return must fall below r_f, otherwise no interior allocation exists")

    @property
    def premium(self):
        return self.returns - self.r_f

    @property
    def mean_premium(self):
        return float(self.probs @ self.premium)

    @property
    def second_moment(self):
        return float(self.probs @ self.premium**2)

    def effective_wealth(self, lam_i, alpha_i, s_i):
        """``z_i`` in every return state, given ``s_i = sum_j g_ij lambda_j``."""
        w = self.wealth
        return w * self.r_f * (1.0 - alpha_i) + w * self.premium * (lam_i - alpha_i * s_i)

    def expected_utility(self, lam_i, alpha_i, s_i):
        return float(self.probs @ self.utility.f(self.effective_wealth(lam_i, alpha_i, s_i)))

    def foc(self, lam_i, alpha_i, s_i):
        """``E[r_p f'(z_i)]``; zero at an interior optimum."""
        z = self.effective_wealth(lam_i, alpha_i, s_i)
        with np.errstate(all="ignore"):
            return float(self.probs @ (self.premium * self.utility.df(z)))

    def to_dict(self):
        return {"wealth": self.wealth, "r_f": self.r_f, "returns": self.returns.tolist(),
                "probs": self.probs.tolist(),
                "utility": {"family": self.utility.family, "params": dict(self.utility.params)}}

    @classmethod
    def from_dict(cls, d):
        util = utility_from_dict(d.get("utility", {"family": "quadratic"}))
        return cls(float(d["wealth"]), d["returns"], d["probs"], util, float(d.get("r_f", 1.0)))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class PortfolioResult:
    lambda_star: np.ndarray
    foc_residual: np.ndarray
    alpha: np.ndarray
    method: str
    iterations: int = 0

    @property
    def corner(self):
        """Agents whose allocation leaves ``[0, 1]``."""
        return (self.lambda_star < 0) | (self.lambda_star > 1)

    def to_rows(self):
        return [(i, self.alpha[i], self.lambda_star[i], self.foc_residual[i])
                for i in range(self.lambda_star.size)]

    def write_csv(self, path):
        write_table(path, ["agent", "alpha", "lambda_star", "z_residual"], self.to_rows())


def quadratic_coefficients(problem, quad):
    """``(kappa1, kappa2)`` of the closed form ``lambda = kappa1 B 1 + kappa2 B alpha``."""
    m2 = problem.second_moment
    if not m2 > 0:
        raise ParameterError("degenerate return distribution: E[r_p^2] = 0")
    ratio = problem.mean_premium / m2
    k1 = (-quad.a1 / (2.0 * quad.a2 * problem.wealth) - problem.r_f) * ratio
    k2 = problem.r_f * ratio
    return k1, k2


def lambda_closed_form(problem, quad, net, prof):
    """Equilibrium equity shares under quadratic utility."""
    net = as_network(net)
    prof = as_profile(prof, net.n)
    B = bonacich(net, prof).resolvent
    k1, k2 = quadratic_coefficients(problem, quad)
    return k1 * B.sum(axis=1) + k2 * (B @ prof.alpha)


def foc_residuals(problem, net, prof, lam):
    net = as_network(net)
    prof = as_profile(prof, net.n)
    s = net.weights @ lam
    return np.array([problem.foc(lam[i], prof.alpha[i], s[i]) for i in range(lam.size)])


def best_response_numeric(problem, alpha_i, s_i, bracket=None):
    """Maximise ``E[f(z_i)]`` over ``lambda_i`` with a derivative-free search (Brent)."""
    lo, hi = _domain_interval(problem, alpha_i, s_i)
    neg = lambda lam: -problem.expected_utility(lam, alpha_i, s_i)  # noqa: E731
    if np.isfinite(lo) and np.isfinite(hi):
        span = hi - lo
        res = scipy.optimize.minimize_scalar(neg, bounds=(lo + 1e-12 * span, hi - 1e-12 * span),
                                             method="bounded", options={"xatol": 1e-12})
    else:
        res = scipy.optimize.minimize_scalar(neg, bracket=bracket, method="brent", tol=1e-12)
    return float(res.x)


def _domain_interval(problem, alpha_i, s_i):
    """Open interval of ``lambda_i`` keeping ``z_i`` inside the utility's domain in every state."""
    lo_dom = problem.utility.domain_lo
    if not np.isfinite(lo_dom):
        return -np.inf, np.inf
    w = problem.wealth
    base = w * problem.r_f * (1.0 - alpha_i)
    lo, hi = -np.inf, np.inf
    for rp, p in zip(problem.premium, problem.probs):
        if p == 0 or rp == 0:
            if base <= lo_dom:
                raise InfeasibleModelError("riskless gain lies outside the utility domain")
            continue
        # base + w rp (lam - alpha s) > lo_dom
        edge = alpha_i * s_i + (lo_dom - base) / (w * rp)
        if rp > 0:
            lo = max(lo, edge)
        else:
            hi = min(hi, edge)
    if not lo < hi:
        raise InfeasibleModelError("no allocation keeps effective wealth inside the utility domain")
    return lo, hi


def _best_response_foc(problem, alpha_i, s_i, x0, xtol=1e-13):
    lo, hi = _domain_interval(problem, alpha_i, s_i)
    h = lambda lam: problem.foc(lam, alpha_i, s_i)  # noqa: E731
    if np.isfinite(lo) and np.isfinite(hi):
        span = hi - lo
        lo, hi = lo + 1e-13 * span, hi - 1e-13 * span
    else:
        # unbounded domain: grow a bracket around the current guess
        step = 1.0
        lo, hi = x0 - step, x0 + step
        while h(lo) <= 0:
            lo -= step
            step *= 2
            if step > 1e12:
                raise InfeasibleModelError("no interior allocation: FOC never positive")
        step = 1.0
        while h(hi) >= 0:
            hi += step
            step *= 2
            if step > 1e12:
                raise InfeasibleModelError("no interior allocation: FOC never negative")
    return safeguarded_newton(h, lo, hi, x0=x0, xtol=xtol)


def solve_portfolio(problem, net, prof, tol=1e-12, max_iterations=10_000, x0=None):
    """Simultaneous first-order conditions by best-response sweeps.

    Stops when the sup-norm change is below ``tol * max(1, max |lambda|)``.
    """
    net = as_network(net)
    prof = as_profile(prof, net.n)
    g, alpha = net.weights, prof.alpha
    lam = np.full(net.n, 0.5) if x0 is None else np.array(x0, dtype=float)
    change = np.inf
    for it in range(1, max_iterations + 1):
        prev = lam.copy()
        for i in range(net.n):
            lam[i] = _best_response_foc(problem, alpha[i], float(g[i] @ lam), lam[i])
        change = float(np.max(np.abs(lam - prev)))
        if change < tol * max(1.0, float(np.max(np.abs(lam)))):
            break
    else:
        raise ConvergenceError("portfolio best responses did not converge", residual=change,
                               iterations=max_iterations)
    return PortfolioResult(lam, foc_residuals(problem, net, prof, lam), np.array(alpha), "fixed-point", it)


def is_dara(utility, z_grid):
    """True when ``-f''/f'`` is strictly decreasing on ``z_grid``."""
    ara = np.array([utility.absolute_risk_aversion(z) for z in np.sort(z_grid)])
    return bool(np.all(np.diff(ara) < 0))


@dataclass
class PortfolioStaticReport:
    j: int
    delta: float
    before: np.ndarray
    after: np.ndarray
    dlam: np.ndarray
    corner: bool
    own_down: bool
    others_weakly_down: bool

    @property
    def holds(self):
        return self.own_down and self.others_weakly_down


def dara_comparative_static(problem, net, prof, j, delta, tol=1e-9, check_dara=True):
    """Raise ``alpha_j`` by ``delta`` and compare the equity shares.

    Requires decreasing absolute risk aversion on the effective-wealth range
    visited by the baseline solution (pass ``check_dara=False`` to compare
    other utilities, e.g. quadratic).  ``corner`` flags allocations outside
    ``[0, 1]``, where the comparison is not meaningful.
    """
    net = as_network(net)
    prof = as_profile(prof, net.n)
    alpha2 = np.array(prof.alpha)
    alpha2[j] += delta
    if delta < 0 or alpha2[j] >= 1:
        raise ParameterError("need delta >= 0 and alpha_j + delta < 1")
    base = solve_portfolio(problem, net, prof)
    if check_dara:
        s = net.weights @ base.lambda_star
        zs = np.concatenate([problem.effective_wealth(base.lambda_star[i], prof.alpha[i], s[i])
                             for i in range(net.n)])
        grid = np.linspace(zs.min(), zs.max(), 64)
        if not is_dara(problem.utility, grid):
            raise ParameterError("utility does not show decreasing absolute risk aversion on the relevant range")
    bumped = solve_portfolio(problem, net, alpha2, x0=base.lambda_star)
    d = bumped.lambda_star - base.lambda_star
    corner = bool(base.corner.any() or bumped.corner.any())
    return PortfolioStaticReport(j, delta, base.lambda_star, bumped.lambda_star, d, corner,
                                 own_down=bool(d[j] < 0), others_weakly_down=bool(np.all(d <= tol)))


class PortfolioAllocation(BaseEstimator):
    """Equilibrium equity shares on a comparison network.

    Parameters
    ----------
    wealth, r_f : float
    returns, probs : array-like
        Gross equity returns and their probabilities.
    utility : str
        Utility family name; ``"quadratic"`` uses the closed form.
    utility_params : dict or None
    """

    def __init__(self, wealth=10.0, returns=(0.7, 1.1, 1.5), probs=(0.25, 0.5, 0.25), r_f=1.0,
                 utility="quadratic", utility_params=None):
        self.wealth = wealth
        self.returns = returns
        self.probs = probs
        self.r_f = r_f
        self.utility = utility
        self.utility_params = utility_params

    def fit(self, G, alpha):
        params = dict(self.utility_params or {})
        quad = QuadraticParams(**params) if self.utility == "quadratic" else None
        util = quad.utility() if quad else make_utility(self.utility, **params)
        problem = PortfolioProblem(self.wealth, self.returns, self.probs, util, self.r_f)
        if quad:
            lam = lambda_closed_form(problem, quad, G, alpha)
            res = PortfolioResult(lam, foc_residuals(problem, G, alpha, lam), np.asarray(alpha, dtype=float),
                                  "closed-form")
        else:
            res = solve_portfolio(problem, G, alpha)
        self.result_ = res
        self.lambda_ = res.lambda_star
        self.residual_ = float(np.max(np.abs(res.foc_residual)))
        return self
