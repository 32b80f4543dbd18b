"""Shared pieces of the reference-dependent consumption game.

Agent ``i`` chooses consumption ``x_i`` to maximise::

    f(m(x_i) - alpha_i * sum_j g_ij m(x_j)) - c x_i + b_i alpha_i sum_j g_ij

Both the closed-form solver and the fixed-point solver return an
:class:`EquilibriumResult` built here.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ParameterError
from .io import write_json, write_table
from .network import CentralityResult
from .utility import UtilitySpec, make_utility, sqrt_utility


@dataclass(frozen=True)
class EquilibriumParams:
    """Marginal cost ``c``, link benefit ``b`` and the utility specification."""

    cost: float = 1.0
    link_benefit: object = 0.0
    utility: UtilitySpec = field(default_factory=sqrt_utility)

    def __post_init__(self):
        if isinstance(self.utility, str):
            object.__setattr__(self, "utility", make_utility(self.utility))
        c = float(self.cost)
        if not (c > 0 and np.isfinite(c)):
            raise ParameterError(f"marginal cost must be positive, got {self.cost!r}")
        object.__setattr__(self, "cost", c)
        gain = self.gain_at(c)
        if not np.isfinite(gain) or gain <= 0:
            raise ParameterError(
                f"F(c) = {gain!r} at c = {c}: cost lies outside the range of f' "
                f"for the {self.utility.family} family"
            )

    def gain_at(self, y):
        """``F(y)``: the gain at which marginal utility equals ``y``."""
        with np.errstate(all="ignore"):
            return float(self.utility.inv_df(y))

    def benefit_vector(self, n):
        b = np.broadcast_to(np.asarray(self.link_benefit, dtype=float), (n,))
        return np.array(b)

    def replace(self, **changes):
        d = {"cost": self.cost, "link_benefit": self.link_benefit, "utility": self.utility}
        d.update(changes)
        return EquilibriumParams(**d)


@dataclass
class EquilibriumResult:
    x_star: np.ndarray
    u_star: np.ndarray
    centrality: Optional[CentralityResult]
    method: str
    iterations: int
    residual: float
    alpha: np.ndarray = None
    trace: list = field(default_factory=list)

    def to_rows(self):
        cb = self.centrality.centrality if self.centrality is not None else np.full(self.x_star.size, np.nan)
        return [(i, self.alpha[i], cb[i], self.x_star[i], self.u_star[i]) for i in range(self.x_star.size)]

    def write_csv(self, path):
        write_table(path, ["agent", "alpha", "centrality", "x_star", "u_star"], self.to_rows())

    def summary(self):
        return {
            "method": self.method,
            "n_agents": int(self.x_star.size),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "x_star_mean": float(self.x_star.mean()),
            "u_star_mean": float(self.u_star.mean()),
            "alpha_bar": float(np.mean(self.alpha)),
        }

    def write_json(self, path):
        write_json(path, self.summary())

    def write_trace(self, path):
        write_table(path, ["iteration", "sup_change"], self.trace)


def reference_points(g, alpha, values):
    """``alpha_i * sum_j g_ij values_j``."""
    return alpha * (g @ values)


def utilities(g, alpha, params, x):
    """Payoff of every agent at action profile ``x``."""
    util = params.utility
    mx = util.inner.m(x)
    gain = mx - reference_points(g, alpha, mx)
    b = params.benefit_vector(x.size)
    with np.errstate(invalid="ignore"):
        return util.f(gain) - params.cost * x + b * alpha * g.sum(axis=1)


def foc_residuals(g, alpha, params, x):
    """``m(x_i) - alpha_i sum_j g_ij m(x_j) - F(c / m'(x_i))`` per agent."""
    util = params.utility
    mx = util.inner.m(x)
    with np.errstate(all="ignore"):
        target = util.inv_df(params.cost / util.inner.dm(x))
    return mx - reference_points(g, alpha, mx) - target
