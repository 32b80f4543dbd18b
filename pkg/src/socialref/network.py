"""Weighted reference networks and Katz-Bonacich centrality.

Agent ``i`` compares itself with a weighted average of the others,
``sum_j g[i, j] x[j]``, scaled by its reference strength ``alpha[i]``.  The
resolvent ``B = (I - diag(alpha) g)^{-1}`` and its row sums (the Bonacich
centralities) drive every equilibrium in the package.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ExistenceError, ParameterError
from .validation import check_alpha, check_weights

COND_LIMIT = 1e12


@dataclass(frozen=True)
class WeightedNetwork:
    """Row-stochastic weights with zero diagonal (``g[i, j]``: weight i puts on j)."""

    weights: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = check_weights(self.weights).copy()
        g.setflags(write=False)
        object.__setattr__(self, "weights", g)

    @property
    def n(self):
        return self.weights.shape[0]

    def __eq__(self, other):
        return isinstance(other, WeightedNetwork) and np.array_equal(self.weights, other.weights)

    __hash__ = None

    @classmethod
    def from_adjacency(cls, adj):
        """Row-normalise a non-negative adjacency matrix (every row needs a link)."""
        adj = np.asarray(adj, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ParameterError("adjacency must be square")
        adj = adj.copy()
        np.fill_diagonal(adj, 0.0)
        deg = adj.sum(axis=1)
        if np.any(deg <= 0):
            raise ParameterError(f"agent {int(np.argmin(deg))} has no outgoing links")
        return cls(adj / deg[:, None])


@dataclass(frozen=True)
class ReferenceProfile:
    """Per-agent reference strengths ``0 <= alpha_i < 1``."""

    alpha: np.ndarray

    def __post_init__(self):
        a = check_alpha(self.alpha).copy()
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def n(self):
        return self.alpha.shape[0]

    @property
    def alpha_bar(self):
        return float(self.alpha.mean())


@dataclass(frozen=True)
class CentralityResult:
    resolvent: np.ndarray
    centrality: np.ndarray
    alpha_bar: float
    condition: float = float("nan")

    # short aliases matching the usual notation
    @property
    def B(self):
        return self.resolvent

    @property
    def C_b(self):
        return self.centrality


@dataclass(frozen=True)
class UncorrelatedCheck:
    holds: bool
    deviation: float
    row_deviation: np.ndarray


def as_network(net):
    return net if isinstance(net, WeightedNetwork) else WeightedNetwork(np.asarray(net, dtype=float))


def as_profile(prof, n=None):
    if not isinstance(prof, ReferenceProfile):
        prof = ReferenceProfile(np.asarray(prof, dtype=float))
    if n is not None and prof.n != n:
        raise ParameterError(f"network has {n} agents but profile has {prof.n}")
    return prof


def comparison_matrix(net, prof):
    """``diag(alpha) @ g``."""
    net = as_network(net)
    prof = as_profile(prof, net.n)
    return prof.alpha[:, None] * net.weights


def bonacich(net, prof):
    """Resolvent ``(I - diag(alpha) g)^{-1}`` and its row sums by LU solve.

    Raises :class:`ExistenceError` when the system is singular or its
    1-norm condition number exceeds ``1e12``.
    """
    net = as_network(net)
    prof = as_profile(prof, net.n)
    n = net.n
    a = np.eye(n) - comparison_matrix(net, prof)
    try:
        lu = scipy.linalg.lu_factor(a, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ExistenceError(f"I - diag(alpha) g is singular: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise ExistenceError("I - diag(alpha) g is singular (requires spectral radius of diag(alpha) g < 1)")
    resolvent = scipy.linalg.lu_solve(lu, np.eye(n))
    cond = float(np.linalg.norm(a, 1) * np.linalg.norm(resolvent, 1))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ExistenceError(
            f"I - diag(alpha) g is near-singular (condition {cond:.3g} > {COND_LIMIT:.0e}); "
            "equilibrium requires alpha_i < 1 for every agent"
        )
    resolvent.setflags(write=False)
    centrality = resolvent.sum(axis=1)
    centrality.setflags(write=False)
    return CentralityResult(resolvent, centrality, prof.alpha_bar, cond)


def bonacich_neumann(net, prof, K):
    """Row sums of the truncated series ``sum_{k=0}^{K} (diag(alpha) g)^k``."""
    if K < 0:
        raise ParameterError("truncation order K must be non-negative")
    ag = comparison_matrix(net, prof)
    term = np.ones(ag.shape[0])
    total = term.copy()
    for _ in range(K):
        term = ag @ term
        total += term
    return total


def neumann_tail_bound(prof, K, n=None):
    """Sup-norm bound on the truncation error of :func:`bonacich_neumann`.

    Row sums of ``(diag(alpha) g)^k`` are at most ``rho^k`` with
    ``rho = max alpha``; the ``n`` factor keeps the bound conservative.
    """
    alpha = as_profile(prof).alpha
    rho = float(alpha.max()) if alpha.size else 0.0
    n = alpha.size if n is None else n
    return rho ** (K + 1) * n / (1.0 - rho)


def uncorrelated_centrality(alpha):
    """Network-free centralities ``1 + alpha_i / (1 - mean(alpha))``.

    Valid whenever reference strengths are uncorrelated with the network;
    only the mean has to stay below one.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.ndim != 1 or alpha.size == 0:
        raise ParameterError("alpha must be a non-empty vector")
    if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
        raise ParameterError("reference strengths must be finite and non-negative")
    alpha_bar = float(alpha.mean())
    if alpha_bar >= 1.0:
        raise ExistenceError(f"mean reference strength {alpha_bar!r} >= 1: no equilibrium exists")
    return 1.0 + alpha / (1.0 - alpha_bar)


def check_uncorrelated(net, prof, tol=1e-9):
    """Test the row identity ``sum_j g_ij alpha_j == mean(alpha) * sum_j g_ij``."""
    net = as_network(net)
    prof = as_profile(prof, net.n)
    g, alpha = net.weights, prof.alpha
    row = g @ alpha - prof.alpha_bar * g.sum(axis=1)
    dev = float(np.max(np.abs(row))) if row.size else 0.0
    return UncorrelatedCheck(dev < tol, dev, row)


def erdos_renyi_row_normalized(n, p, seed=None, return_redraws=False):
    """Directed G(n, p) graph with each row scaled to sum to one.

    Every ordered pair ``(i, j)``, ``i != j``, is linked independently with
    probability ``p``.  A row without links is redrawn until it has one so the
    network stays row-stochastic without self-loops.
    """
    if n < 2:
        raise ParameterError("need at least two agents")
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"link probability must lie in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    redraws = 0
    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        while not adj[i].any():
            redraws += 1
            adj[i] = (rng.random(n) < p) & off[i]
    g = adj / adj.sum(axis=1, keepdims=True)
    net = WeightedNetwork(g, info={"redraws": redraws, "n": n, "p": p})
    return (net, redraws) if return_redraws else net


class BonacichCentrality(BaseEstimator):
    """Estimator wrapper around :func:`bonacich`.

    Parameters
    ----------
    method : {"solve", "neumann"}
        Direct LU solve, or the truncated series (``n_terms`` powers).
    n_terms : int
        Truncation order for ``method="neumann"``.

    Attributes
    ----------
    centrality_ : ndarray of shape (n,)
    resolvent_ : ndarray of shape (n, n), only for ``method="solve"``
    alpha_bar_ : float
    """

    def __init__(self, method="solve", n_terms=200):
        self.method = method
        self.n_terms = n_terms

    def fit(self, G, alpha):
        net = as_network(G)
        prof = as_profile(alpha, net.n)
        if self.method == "solve":
            res = bonacich(net, prof)
            self.resolvent_ = res.resolvent
            self.centrality_ = res.centrality
        elif self.method == "neumann":
            self.centrality_ = bonacich_neumann(net, prof, self.n_terms)
        else:
            raise ParameterError(f"unknown method {self.method!r}")
        self.alpha_ = prof.alpha
        self.alpha_bar_ = prof.alpha_bar
        self.n_agents_ = net.n
        return self

    def transform(self, G, alpha):
        return self.fit(G, alpha).centrality_

    def fit_transform(self, G, alpha):
        return self.transform(G, alpha)

    def uncorrelated_gap(self):
        """Sup-distance between the fitted centralities and the network-free formula."""
        check_is_fitted(self, "centrality_")
        return float(np.max(np.abs(self.centrality_ - uncorrelated_centrality(self.alpha_))))
