"""Reservation wages in a McCall search model with a social reference point.

An unemployed agent draws offers ``w ~ G`` on ``[0, Z]`` and values an
accepted job at ``f(w - R) / (1 - beta)``, where ``R`` is the agent's reference
point.  The reservation wage ``w_bar`` leaves the agent indifferent::

    f(w_bar - R) = beta / (1 - beta) * int_{w_bar}^{Z} [f(w - R) - f(w_bar - R)] dG(w)

With endogenous references ``R_i = alpha_i sum_j g_ij w_bar_j`` the whole
vector is found by iterating the scalar solve.
"""

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.stats
from sklearn.base import BaseEstimator

from .exceptions import (BoundViolationError, ConvergenceError, InfeasibleModelError,
                         ParameterError)
from .io import write_table
from .network import as_network, as_profile
from .utility import UtilitySpec, make_utility, utility_from_dict

SIMPSON_START = 64
SIMPSON_TOL = 1e-10
SIMPSON_MAX_PANELS = 1 << 20


@dataclass(frozen=True)
class WageOfferDistribution:
    """Offer distribution on ``[0, Z]`` with cdf ``G`` and density ``g``."""

    kind: str
    Z: float
    cdf: Callable
    pdf: Callable
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        Z = float(self.Z)
        if not (Z > 0 and np.isfinite(Z)):
            raise ParameterError(f"maximum offer Z must be positive and finite, got {self.Z!r}")
        object.__setattr__(self, "Z", Z)

    def check(self, tol=1e-8):
        """Verify ``G(0) = 0``, ``G(Z) = 1`` and that the density integrates to one."""
        G0, GZ = float(self.cdf(0.0)), float(self.cdf(self.Z))
        if abs(G0) > tol or abs(GZ - 1.0) > tol:
            raise ParameterError(f"{self.kind}: need G(0)=0 and G(Z)=1, got {G0!r}, {GZ!r}")
        mass = _simpson(lambda w: self.pdf(w), np.array([0.0]), np.array([self.Z]))[0]
        if abs(mass - 1.0) > tol:
            raise ParameterError(f"{self.kind}: density integrates to {mass!r}")
        return self

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


def uniform_offers(Z=100.0):
    Z = float(Z)
    return WageOfferDistribution(
        "uniform", Z,
        cdf=lambda w: np.clip(np.asarray(w, dtype=float) / Z, 0.0, 1.0),
        pdf=lambda w: np.where((np.asarray(w) >= 0) & (np.asarray(w) <= Z), 1.0 / Z, 0.0),
        params={"Z": Z},
    )


def beta_offers(a, b, Z=100.0):
    """Beta(a, b) stretched to ``[0, Z]``; ``a, b >= 1`` keeps the density bounded."""
    if a < 1 or b < 1:
        raise ParameterError("beta-scaled offers need a >= 1 and b >= 1 (bounded density)")
    rv = scipy.stats.beta(a, b, scale=float(Z))
    return WageOfferDistribution("beta-scaled", Z, rv.cdf, rv.pdf, {"a": a, "b": b, "Z": float(Z)})


def custom_offers(cdf, pdf, Z):
    return WageOfferDistribution("custom", Z, cdf, pdf).check()


def offers_from_dict(d, Z=None):
    d = dict(d)
    kind = d.get("kind", "uniform")
    params = dict(d.get("params", {}))
    if Z is not None:
        params.setdefault("Z", Z)
    if kind == "uniform":
        return uniform_offers(**params)
    if kind == "beta-scaled":
        return beta_offers(**params)
    raise ParameterError(f"unknown offer distribution {kind!r}")


@dataclass(frozen=True)
class McCallProblem:
    beta: float
    dist: WageOfferDistribution
    utility: UtilitySpec

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"discount factor must lie in (0, 1), got {self.beta!r}")
        if isinstance(self.utility, str):
            object.__setattr__(self, "utility", make_utility(self.utility))

    @property
    def Z(self):
        return self.dist.Z

    def to_dict(self):
        return {"beta": self.beta, "Z": self.Z, "dist": self.dist.to_dict(),
                "utility": {"family": self.utility.family, "params": dict(self.utility.params)}}

    @classmethod
    def from_dict(cls, d):
        Z = d.get("Z", 100.0)
        dist = offers_from_dict(d.get("dist", {"kind": "uniform"}), Z=Z)
        util = utility_from_dict(d.get("utility", {"family": "power", "params": {"theta": 0.25}}))
        return cls(float(d["beta"]), dist, util)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_problem(beta=0.98, Z=100.0, theta=0.25):
    """Power utility ``f(z) = z**theta`` with uniform offers on ``[0, Z]``."""
    from .utility import power
    return McCallProblem(beta, uniform_offers(Z), power(theta))


@dataclass
class ReservationWageResult:
    w_bar: np.ndarray
    residual: np.ndarray
    iterations: int
    R: np.ndarray
    alpha: Optional[np.ndarray] = None
    trace: list = field(default_factory=list)

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residual)))

    def to_rows(self):
        alpha = self.alpha if self.alpha is not None else np.zeros_like(self.w_bar)
        return [(i, alpha[i], self.R[i], self.w_bar[i], self.residual[i], self.iterations)
                for i in range(self.w_bar.size)]

    def write_csv(self, path):
        write_table(path, ["agent", "alpha", "R", "w_bar", "residual", "iterations"], self.to_rows())


def _simpson(fun, a, b, tol=SIMPSON_TOL, start=SIMPSON_START, power=1):
    """Composite Simpson on ``[a_i, b_i]`` for each i, doubling panels until stable.

    ``fun`` takes an ``(m, k)`` array of nodes and returns values of the same
    shape.  With ``power=q`` the rule runs in ``s`` where
    ``x = a + (b - a) s**q``, which smooths a ``(x - a)**(1/q)`` singularity
    at the left end.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = start
    prev = None
    while True:
        t = np.linspace(0.0, 1.0, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        if power != 1:
            w = w * power * t ** (power - 1)
            t = t**power
        nodes = a[:, None] + (b - a)[:, None] * t[None, :]
        vals = fun(nodes)
        est = (vals @ w) * (b - a) / (3.0 * n)
        if prev is not None and np.max(np.abs(est - prev)) < tol:
            return est
        if n >= SIMPSON_MAX_PANELS:
            raise ConvergenceError(f"Simpson rule not converged at {n} panels",
                                   residual=float(np.max(np.abs(est - prev))), iterations=n)
        prev = est
        n *= 2


def _surplus(problem, w_bar, R):
    """``int_{w_bar}^{Z} [f(w - R) - f(w_bar - R)] g(w) dw`` per agent."""
    f, pdf = problem.utility.f, problem.dist.pdf
    base = f(w_bar - R)
    Rc = R[:, None]
    bc = base[:, None]
    with np.errstate(invalid="ignore"):
        # the s**4 map keeps power utilities smooth when w_bar is close to R
        return _simpson(lambda w: (f(w - Rc) - bc) * pdf(w), w_bar, np.full_like(w_bar, problem.Z),
                        power=4)


def residual(problem, w_bar, R):
    """Indifference residual ``f(w_bar - R) - beta/(1-beta) * surplus`` (vectorised)."""
    w_bar = np.atleast_1d(np.asarray(w_bar, dtype=float))
    R = np.broadcast_to(np.asarray(R, dtype=float), w_bar.shape).astype(float)
    k = problem.beta / (1.0 - problem.beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        own = problem.utility.f(w_bar - R)
    out = np.full(w_bar.shape, -np.inf)
    ok = np.isfinite(own)
    if ok.any():
        out[ok] = own[ok] - k * _surplus(problem, w_bar[ok], R[ok])
    return out


def _residual_slope(problem, w_bar, R):
    # d/dw_bar of the residual: f'(w_bar - R) * (1 + beta/(1-beta) * (1 - G(w_bar)))
    k = problem.beta / (1.0 - problem.beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return problem.utility.df(w_bar - R) * (1.0 + k * (1.0 - problem.dist.cdf(w_bar)))


def _solve_vector(problem, R, x0=None, xtol=1e-12, max_iter=200):
    """Bracketed Newton on ``[R_i, Z]`` for every agent at once.

    Returns the upper bracket end once the bracket has collapsed, so every
    solution satisfies ``w_bar > R``.
    """
    R = np.asarray(R, dtype=float)
    Z = problem.Z
    if np.any(R >= Z):
        i = int(np.argmax(R >= Z))
        raise ParameterError(f"reference point R={R[i]!r} must lie below the maximum offer Z={Z!r}")
    lo = R.copy()
    hi = np.full_like(R, Z)
    r_lo = residual(problem, lo, R)
    r_hi = residual(problem, hi, R)
    bad = ~((r_lo < 0) & (r_hi > 0))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InfeasibleModelError(
            f"no sign change on [R, Z] = [{lo[i]!r}, {Z!r}]: residuals {r_lo[i]!r}, {r_hi[i]!r}"
        )
    x = 0.5 * (lo + hi) if x0 is None else np.clip(np.asarray(x0, dtype=float), lo, hi)
    x = np.where((x <= lo) | (x >= hi), 0.5 * (lo + hi), x)
    done = np.zeros(R.shape, dtype=bool)
    out = np.empty_like(R)
    for _ in range(max_iter):
        act = ~done
        xa, Ra = x[act], R[act]
        ra = residual(problem, xa, Ra)
        lo_a, hi_a = lo[act], hi[act]
        up = ra > 0
        hi_a = np.where(up, xa, hi_a)
        lo_a = np.where(up, lo_a, xa)
        exact = ra == 0
        d = _residual_slope(problem, xa, Ra)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - ra / d
        ok = np.isfinite(xn) & (xn > lo_a) & (xn < hi_a)
        small = ok & (np.abs(xn - xa) <= xtol * np.maximum(1.0, np.abs(xa)))
        narrow = (hi_a - lo_a) <= xtol * np.maximum(1.0, np.abs(hi_a))
        finish = exact | small | narrow
        val = np.where(exact, xa, np.where(small, xn, hi_a))
        idx = np.flatnonzero(act)
        out[idx[finish]] = val[finish]
        done[idx[finish]] = True
        lo[act], hi[act] = lo_a, hi_a
        x[act] = np.where(ok, xn, 0.5 * (lo_a + hi_a))
        if done.all():
            break
    else:
        raise ConvergenceError("reservation-wage root not isolated", iterations=max_iter)
    if np.any(out <= R):
        raise BoundViolationError("reservation wage did not exceed the reference point")
    return out


def reservation_wage_exogenous(problem, R, x0=None):
    """Reservation wage(s) for given reference point(s) ``R``.

    Accepts a scalar or a vector of reference points; the result holds one
    ``w_bar`` per entry with ``R < w_bar <= Z``.
    """
    R = np.atleast_1d(np.asarray(R, dtype=float))
    if not np.all(np.isfinite(R)):
        raise ParameterError("reference points must be finite")
    w = _solve_vector(problem, R, x0)
    return ReservationWageResult(w, residual(problem, w, R), 1, R)


def endogenous_update(problem, net, prof, w, jacobi=True):
    """One pass of the reference-point iteration starting from ``w``.

    Reference points ``R_i = alpha_i sum_j g_ij w_j`` are computed from the
    current vector and every agent re-solves its scalar equation.  With
    ``jacobi=False`` agents update one at a time and later agents see the
    new wages of earlier ones.
    """
    g, alpha = net.weights, prof.alpha
    w = np.array(w, dtype=float)
    if jacobi:
        R = alpha * (g @ w)
        return _solve_vector(problem, R, x0=w), R
    R = np.empty_like(w)
    for i in range(w.size):
        R[i] = alpha[i] * float(g[i] @ w)
        w[i] = _solve_vector(problem, R[i:i + 1], x0=w[i:i + 1])[0]
    return w, R


@dataclass(frozen=True)
class EndogenousConfig:
    max_iterations: int = 10_000
    tol: float = 1e-10
    x0: Optional[np.ndarray] = None
    scheme: str = "jacobi"
    trace: bool = False

    def __post_init__(self):
        if self.max_iterations < 1 or not self.tol > 0:
            raise ParameterError("need max_iterations >= 1 and tol > 0")
        if self.scheme not in ("jacobi", "gauss-seidel"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")


def reservation_wage_endogenous(problem, net, prof, config=None):
    """Equilibrium reservation wages when references are peers' reservation wages.

    Starts from ``config.x0`` (zeros by default), recomputes every reference
    point from the current wages, re-solves each agent and stops once the
    sup-norm change falls below ``config.tol``.
    """
    config = EndogenousConfig() if config is None else config
    if isinstance(problem, (list, tuple)):
        problem = _common_problem(problem)
    net = as_network(net)
    prof = as_profile(prof, net.n)
    w = np.zeros(net.n) if config.x0 is None else np.array(config.x0, dtype=float)
    if w.shape != (net.n,):
        raise ParameterError(f"initial guess must have length {net.n}")
    w = np.clip(w, 0.0, problem.Z)
    trace = []
    change = np.inf
    for it in range(1, config.max_iterations + 1):
        new, R = endogenous_update(problem, net, prof, w, jacobi=config.scheme == "jacobi")
        change = float(np.max(np.abs(new - w)))
        w = new
        if config.trace:
            trace.append((it, change))
        if change < config.tol:
            break
    else:
        raise ConvergenceError(f"reservation wages did not converge in {config.max_iterations} passes "
                               f"(last sup change {change:.3e})", residual=change,
                               iterations=config.max_iterations)
    R = prof.alpha * (net.weights @ w)
    return ReservationWageResult(w, residual(problem, w, R), it, R, np.array(prof.alpha), trace)


def _common_problem(problems):
    first = problems[0]
    for p in problems[1:]:
        if p.beta != first.beta or p.dist is not first.dist or p.utility is not first.utility:
            raise ParameterError("all agents must share beta, offer distribution and utility")
    return first


def value_iteration_oracle(problem, R, grid_size=100_000, tol=1e-12, max_iter=1_000_000):
    """Acceptance threshold from value iteration on a discretised offer grid.

    Offers sit at cell midpoints of a ``grid_size``-cell partition of
    ``[0, Z]`` with the exact cell probabilities.  The continuation value
    ``Q = E[V]`` is iterated to ``tol``; the returned threshold is the
    smallest grid offer worth accepting, so it is accurate to one cell.
    """
    if grid_size < 1000:
        raise ParameterError("grid_size must be at least 1000")
    Z = problem.Z
    if R >= Z:
        raise ParameterError("reference point must lie below Z")
    edges = np.linspace(0.0, Z, grid_size + 1)
    w = 0.5 * (edges[1:] + edges[:-1])
    p = np.diff(problem.dist.cdf(edges))
    p = p / p.sum()
    beta = problem.beta
    accept = np.full(grid_size, -np.inf)
    ok = w > R
    with np.errstate(divide="ignore"):
        accept[ok] = problem.utility.f(w[ok] - R) / (1.0 - beta)
    Q = float(p[ok] @ accept[ok])
    for _ in range(max_iter):
        Qn = float(p @ np.maximum(accept, beta * Q))
        if abs(Qn - Q) <= tol * max(1.0, abs(Q)):
            Q = Qn
            break
        Q = Qn
    else:
        raise ConvergenceError("value iteration did not converge", iterations=max_iter)
    idx = np.flatnonzero(accept >= beta * Q)
    return float(w[idx[0]]) if idx.size else Z


class ReservationWage(BaseEstimator):
    """Reservation wages with reference points set by peers.

    ``fit(G, alpha)`` solves the network equilibrium; ``predict(R)`` returns
    the reservation wage for given reference points.

    Parameters
    ----------
    beta : float
    Z : float
        Maximum offer; offers are uniform on ``[0, Z]``.
    theta : float
        Exponent of the power utility ``f(z) = z**theta``.
    tol, max_iter : iteration settings for ``fit``.
    """

    def __init__(self, beta=0.98, Z=100.0, theta=0.25, tol=1e-10, max_iter=10_000):
        self.beta = beta
        self.Z = Z
        self.theta = theta
        self.tol = tol
        self.max_iter = max_iter

    def _problem(self):
        return default_problem(self.beta, self.Z, self.theta)

    def fit(self, G, alpha):
        res = reservation_wage_endogenous(
            self._problem(), G, alpha, EndogenousConfig(max_iterations=self.max_iter, tol=self.tol))
        self.result_ = res
        self.w_bar_ = res.w_bar
        self.reference_ = res.R
        self.n_iter_ = res.iterations
        return self

    def predict(self, R):
        return reservation_wage_exogenous(self._problem(), R).w_bar
