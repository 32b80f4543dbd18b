"""Two-type labour market where workers compare wages with friends and coworkers.

Skilled (``e_S``) and unskilled (``e_U = 1``) workers fill equal numbers of
vacancies at high (``k_H``) and low (``k_L = 1``) productivity firms and earn
``gamma * e * k``.  Worker ``i`` splits a fixed comparison weight
``alpha_total`` between friends (``alpha1_i``) and coworkers
(``alpha2_i = alpha_total - alpha1_i``).  Because friends' wages do not move
with a worker's own firm choice, a skilled worker picks H exactly when::

    gamma e_S (k_H - k_L) >= alpha2_i (wbar_H(c) - wbar_L(c))

where ``c`` is the share of skilled workers at H firms and ``wbar_m`` the
average wage at a type-``m`` firm.
"""

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ParameterError
from .io import write_json, write_table
from .utility import UtilitySpec, cara, make_utility, utility_from_dict


@dataclass(frozen=True)
class LaborEconomy:
    """Abilities, productivities, surplus share and comparison strengths.

    ``alpha1`` holds one friend-comparison strength per worker.  The first
    ``n // 2`` workers are skilled; there are ``n // 2`` vacancies at each
    firm type.  ``friends`` is an optional row-stochastic friendship matrix
    used for welfare (uniform over all other workers when omitted).
    """

    e_S: float
    k_H: float
    gamma: float
    alpha_total: float
    alpha1: np.ndarray
    e_U: float = 1.0
    k_L: float = 1.0
    coworker_gamma: bool = False
    link_benefit: float = 0.0
    utility: UtilitySpec = field(default_factory=cara)
    friends: Optional[np.ndarray] = None

    def __post_init__(self):
        a1 = np.asarray(self.alpha1, dtype=float)
        object.__setattr__(self, "alpha1", a1)
        if self.e_U != 1.0 or self.k_L != 1.0:
            raise ParameterError("normalisation requires e_U = k_L = 1")
        if not self.e_S > self.e_U:
            raise ParameterError("need e_S > e_U = 1")
        if not self.k_H > self.k_L:
            raise ParameterError("need k_H > k_L = 1")
        if not 0.0 < self.gamma < 1.0:
            raise ParameterError("surplus share gamma must lie in (0, 1)")
        if not 0.0 < self.alpha_total < 1.0:
            raise ParameterError("total comparison strength must lie in (0, 1)")
        if a1.ndim != 1 or a1.size < 2 or a1.size % 2:
            raise ParameterError("alpha1 needs an even number (>= 2) of workers")
        if np.any(a1 < 0) or np.any(a1 > self.alpha_total + 1e-15):
            raise ParameterError("need 0 <= alpha1_i <= alpha_total")
        if isinstance(self.utility, str):
            object.__setattr__(self, "utility", make_utility(self.utility))
        if self.friends is not None:
            g = np.asarray(self.friends, dtype=float)
            if g.shape != (a1.size, a1.size):
                raise ParameterError("friendship matrix must be n x n")
            object.__setattr__(self, "friends", g)

    @property
    def n(self):
        return self.alpha1.size

    @property
    def n_skilled(self):
        return self.n // 2

    @property
    def skilled(self):
        s = np.zeros(self.n, dtype=bool)
        s[: self.n_skilled] = True
        return s

    @property
    def alpha2(self):
        return np.clip(self.alpha_total - self.alpha1, 0.0, self.alpha_total)

    @property
    def coworker_scale(self):
        return self.gamma if self.coworker_gamma else 1.0

    def average_wages(self, c):
        """``(wbar_H, wbar_L)`` when a share ``c`` of skilled workers is at H firms."""
        g, eS, eU = self.gamma, self.e_S, self.e_U
        return (g * self.k_H * (c * eS + (1 - c) * eU),
                g * self.k_L * ((1 - c) * eS + c * eU))

    def prefers_high(self, c):
        """Boolean per skilled worker: H is weakly better at sorting ``c``."""
        wH, wL = self.average_wages(c)
        a2 = self.alpha2[self.skilled]
        gap = self.gamma * self.e_S * (self.k_H - self.k_L)
        return gap >= a2 * self.coworker_scale * (wH - wL)

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if k not in ("utility", "friends")}
        d["alpha1"] = self.alpha1.tolist()
        d["utility"] = {"family": self.utility.family, "params": dict(self.utility.params)}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        a1 = d.pop("alpha1", None)
        if isinstance(a1, dict) or a1 is None:
            spec = a1 or {}
            rng = np.random.default_rng(spec.get("seed", 0))
            n = int(spec.get("n_workers", 100))
            a1 = rng.uniform(0.0, float(d["alpha_total"]), n)
        util = d.pop("utility", None)
        if isinstance(util, dict):
            util = utility_from_dict(util)
        kw = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if util is not None:
            kw["utility"] = util
        return cls(alpha1=np.asarray(a1, dtype=float), **kw)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def random_economy(rng, n_workers=100, e_S=None, k_H=None, gamma=None, alpha_total=None, **kw):
    rng = np.random.default_rng(rng)
    e_S = rng.uniform(1.1, 4.0) if e_S is None else e_S
    k_H = rng.uniform(1.1, 4.0) if k_H is None else k_H
    gamma = rng.uniform(0.2, 0.8) if gamma is None else gamma
    alpha_total = rng.uniform(0.2, 0.95) if alpha_total is None else alpha_total
    a1 = rng.uniform(0.0, alpha_total, n_workers)
    return LaborEconomy(e_S, k_H, gamma, alpha_total, a1, **kw)


def sorting_share(economy, c):
    """``Phi(c)``: share of skilled workers preferring H at sorting ``c``."""
    return float(np.mean(economy.prefers_high(c)))


def sorting_fixed_point(economy, tol=1e-13):
    """``c* = inf{c in [1/2, 1] : c >= Phi(c)}`` by bisection (``Phi`` is non-increasing)."""
    if sorting_share(economy, 1.0) >= 1.0:
        return 1.0
    lo, hi = 0.5, 1.0
    if not sorting_share(economy, lo) > lo:
        raise AssertionError("sorting map has no crossing above one half")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid >= sorting_share(economy, mid):
            hi = mid
        else:
            lo = mid
    return hi


def sorting_grid_oracle(economy, grid_size=2_000_001):
    """Grid search for the smallest ``c`` on a uniform grid with ``c >= Phi(c)``.

    Evaluates the preference inequality directly for every worker and grid
    point, so it shares nothing with the bisection beyond the model.
    """
    cs = np.linspace(0.5, 1.0, grid_size)
    wH = economy.gamma * economy.k_H * (cs * economy.e_S + (1 - cs) * economy.e_U)
    wL = economy.gamma * economy.k_L * ((1 - cs) * economy.e_S + cs * economy.e_U)
    lhs = economy.gamma * economy.e_S * (economy.k_H - economy.k_L)
    a2 = np.sort(economy.alpha2[economy.skilled])
    # number of workers with a2 * scale * (wH - wL) <= lhs, via the sorted alpha2
    with np.errstate(divide="ignore"):
        cut = lhs / (economy.coworker_scale * (wH - wL))
    share = np.searchsorted(a2, cut, side="right") / a2.size
    ok = cs >= share
    return float(cs[np.argmax(ok)]) if ok.any() else 1.0


@dataclass
class SortingEquilibrium:
    economy: LaborEconomy
    sorting: float
    alpha1_crit: float
    wbar_H: float
    wbar_L: float
    firm_high: np.ndarray
    wages: np.ndarray
    output: float
    wage_variance: float
    welfare: np.ndarray

    @property
    def n_skilled_high(self):
        return int(np.sum(self.firm_high & self.economy.skilled))

    def gini(self):
        w = np.sort(self.wages)
        n = w.size
        return float((2 * np.arange(1, n + 1) - n - 1) @ w / (n * w.sum()))

    def summary(self):
        sk = self.economy.skilled
        return {
            "sorting": self.sorting,
            "alpha1_crit": self.alpha1_crit,
            "wbar_H": self.wbar_H,
            "wbar_L": self.wbar_L,
            "skilled_at_high": self.n_skilled_high,
            "output": self.output,
            "wage_variance": self.wage_variance,
            "wage_gini": self.gini(),
            "welfare_skilled_mean": float(self.welfare[sk].mean()),
            "welfare_skilled_min": float(self.welfare[sk].min()),
        }

    def to_rows(self):
        e = self.economy
        return [(i, "skilled" if e.skilled[i] else "unskilled", "H" if self.firm_high[i] else "L",
                 self.wages[i], e.alpha1[i], e.alpha2[i]) for i in range(e.n)]

    def write_csv(self, path):
        write_table(path, ["worker", "type", "firm", "wage", "alpha1", "alpha2"], self.to_rows())

    def write_json(self, path):
        write_json(path, self.summary())


def _friend_matrix(economy):
    if economy.friends is not None:
        return economy.friends
    n = economy.n
    g = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(g, 0.0)
    return g


def welfare(economy, wages, firm_high, c, friend_wages=None):
    """Per-worker utility ``f(w_i - alpha1_i (g w)_i - alpha2_i wbar_m) + b alpha1_i``.

    ``friend_wages`` fixes the wages entering the friend comparison
    (the equilibrium wages by default).
    """
    fw = wages if friend_wages is None else friend_wages
    wH, wL = economy.average_wages(c)
    wbar = np.where(firm_high, wH, wL)
    gain = wages - economy.alpha1 * (_friend_matrix(economy) @ fw) \
        - economy.alpha2 * economy.coworker_scale * wbar
    return economy.utility.f(gain) + economy.link_benefit * economy.alpha1


def solve_sorting(economy, friend_wages=None):
    """Equilibrium sorting, assignment, wages and summary outcomes.

    The ``round(c* N_S)`` skilled workers with the largest ``alpha1`` go to
    H firms; unskilled workers fill the remaining vacancies in index order.
    """
    c = sorting_fixed_point(economy)
    ns, n = economy.n_skilled, economy.n
    k = int(round(c * ns))
    skilled = economy.skilled
    order = np.argsort(-economy.alpha1[:ns], kind="stable")
    firm_high = np.zeros(n, dtype=bool)
    firm_high[order[:k]] = True
    firm_high[ns: ns + (n // 2 - k)] = True
    e = np.where(skilled, economy.e_S, economy.e_U)
    kk = np.where(firm_high, economy.k_H, economy.k_L)
    wages = economy.gamma * e * kk
    crit = float(economy.alpha1[order[k - 1]]) if k > 0 else float("inf")
    wH, wL = economy.average_wages(c)
    u = welfare(economy, wages, firm_high, c, friend_wages)
    return SortingEquilibrium(economy, c, crit, wH, wL, firm_high, wages,
                              float(np.sum(e * kk)), float(np.var(wages)), u)


def threshold_separated(eq):
    """Every H-skilled worker has ``alpha1`` at least that of every L-skilled worker."""
    sk = eq.economy.skilled
    a1 = eq.economy.alpha1
    hi = a1[sk & eq.firm_high]
    lo = a1[sk & ~eq.firm_high]
    if hi.size == 0 or lo.size == 0:
        return True
    return bool(hi.min() >= lo.max())


def vacancies_balanced(eq):
    half = eq.economy.n // 2
    return int(eq.firm_high.sum()) == half and int((~eq.firm_high).sum()) == half


def perturb(economy, dimension, delta):
    """Economy with one primitive moved by ``delta``.

    ``alpha2_shift`` raises every coworker weight by ``delta`` at a fixed
    total, i.e. ``alpha1_i -> max(alpha1_i - delta, 0)``.
    """
    if dimension == "alpha2_shift":
        return economy.replace(alpha1=np.maximum(economy.alpha1 - delta, 0.0))
    if dimension == "k_H":
        return economy.replace(k_H=economy.k_H + delta)
    if dimension == "e_S":
        return economy.replace(e_S=economy.e_S + delta)
    raise ParameterError(f"unknown dimension {dimension!r}; use alpha2_shift, k_H or e_S")


@dataclass
class SortingStaticReport:
    dimension: str
    delta: float
    c_before: float
    c_after: float
    expected_sign: int
    holds: bool

    @property
    def dc(self):
        return self.c_after - self.c_before


_EXPECTED = {"alpha2_shift": -1, "k_H": 1, "e_S": -1}


def comparative_statics_sorting(economy, dimension, delta, tol=1e-12):
    after = perturb(economy, dimension, delta)
    c0 = sorting_fixed_point(economy)
    c1 = sorting_fixed_point(after)
    sign = _EXPECTED[dimension]
    holds = (c1 - c0) * sign >= -tol
    return SortingStaticReport(dimension, delta, c0, c1, sign, bool(holds))


@dataclass
class AggregateReport:
    delta: float
    before: SortingEquilibrium
    after: SortingEquilibrium
    output_down: bool
    variance_down: bool
    welfare_down: bool

    @property
    def holds(self):
        return self.output_down and self.variance_down and self.welfare_down

    def summary(self):
        return {
            "delta": self.delta,
            "sorting": [self.before.sorting, self.after.sorting],
            "output": [self.before.output, self.after.output],
            "wage_variance": [self.before.wage_variance, self.after.wage_variance],
            "wage_gini": [self.before.gini(), self.after.gini()],
            "output_down": self.output_down,
            "variance_down": self.variance_down,
            "welfare_down": self.welfare_down,
        }


def aggregate_effects(economy, delta, tol=1e-12):
    """Raise the total comparison strength by ``delta``, keeping each friend/coworker mix.

    Friend reference points are evaluated at the baseline equilibrium
    wages in both solves.  The wage Gini is reported but not compared.
    """
    new_total = economy.alpha_total + delta
    if not 0 < new_total < 1:
        raise ParameterError("alpha_total + delta must stay in (0, 1)")
    before = solve_sorting(economy)
    scale = new_total / economy.alpha_total
    moved = economy.replace(alpha_total=new_total, alpha1=np.minimum(economy.alpha1 * scale, new_total))
    after = solve_sorting(moved, friend_wages=before.wages)
    sk = economy.skilled
    return AggregateReport(
        delta, before, after,
        output_down=after.output <= before.output + tol,
        variance_down=after.wage_variance <= before.wage_variance + tol,
        welfare_down=bool(np.all(after.welfare[sk] <= before.welfare[sk] + tol)),
    )


@dataclass(frozen=True)
class StabilityViolation:
    kind: str  # "cut" or "add"
    i: int
    j: int
    gain_i: float
    gain_j: float


def _check_friend_net(G, alpha1, tol):
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ParameterError("friendship weights must be square")
    if np.any(G < 0) or np.any(np.diag(G) != 0):
        raise ParameterError("friendship weights must be non-negative with zero diagonal")
    if np.max(np.abs(G - G.T)) > tol:
        raise ParameterError("friendship weights must be symmetric")
    if alpha1 is not None and np.max(np.abs(G.sum(axis=1) - alpha1)) > 1e-9:
        raise ParameterError("row sums of the friendship weights must equal alpha1")
    return G


def _reference_shift(G, wages, i, j, eps, mode, adding):
    """Change in ``sum_k G_ik w_k`` when ``i`` moves ``eps`` of weight onto (or off) ``j``."""
    row = G[i].copy()
    row[i] = 0.0
    if mode == "own-wage":
        # the weight moves between j and a comparison at i's own wage
        d = wages[j] - wages[i]
        return eps * d if adding else -eps * d
    others = row.copy()
    if not adding:
        others[j] = 0.0
    mass = others.sum()
    if mass <= 0:
        return None  # nothing to reallocate from / to
    avg = float(others @ wages) / mass
    return eps * (wages[j] - avg) if adding else -eps * (wages[j] - avg)


def check_pairwise_stability(G, wages, alpha1=None, epsilon=1e-3, mode="own-wage", utility=None,
                             base_gain=None, tol=1e-12):
    """All pairwise-stability violations of a symmetric friendship network.

    A link is cut by one endpoint moving ``epsilon`` of weight off it; a link
    is added when both endpoints move ``epsilon`` onto it.  Row sums stay at
    ``alpha1_i``.  With ``mode="own-wage"`` the moved weight comes from (or
    goes to) a comparison at the agent's own wage; with ``"proportional"``
    it is spread over the agent's other links in proportion to their weight.
    A cut is a violation when the cutter strictly gains; an addition when
    both gain weakly and one strictly.  Payoffs use ``utility.f`` (CARA by
    default) at the gains ``base_gain`` (wages minus references if omitted).
    """
    if mode not in ("own-wage", "proportional"):
        raise ParameterError(f"unknown deviation mode {mode!r}")
    wages = np.asarray(wages, dtype=float)
    G = _check_friend_net(G, alpha1, tol=1e-12)
    if wages.shape != (G.shape[0],):
        raise ParameterError("one wage per agent required")
    f = (utility or cara()).f
    base = wages - G @ wages if base_gain is None else np.asarray(base_gain, dtype=float)

    def gain(i, shift):
        return float(f(base[i] - shift) - f(base[i]))

    out = []
    n = G.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if G[i, j] > 0:
                eps = min(epsilon, G[i, j])
                gi = gj = 0.0
                si = _reference_shift(G, wages, i, j, eps, mode, adding=False)
                sj = _reference_shift(G, wages, j, i, eps, mode, adding=False)
                gi = gain(i, si) if si is not None else 0.0
                gj = gain(j, sj) if sj is not None else 0.0
                if gi > tol or gj > tol:
                    out.append(StabilityViolation("cut", i, j, gi, gj))
            else:
                si = _reference_shift(G, wages, i, j, epsilon, mode, adding=True)
                sj = _reference_shift(G, wages, j, i, epsilon, mode, adding=True)
                if si is None or sj is None:
                    continue
                gi, gj = gain(i, si), gain(j, sj)
                if gi >= -tol and gj >= -tol and max(gi, gj) > tol:
                    out.append(StabilityViolation("add", i, j, gi, gj))
    return out


def write_violations(path, violations):
    write_table(path, ["kind", "i", "j", "gain_i", "gain_j"],
                [(v.kind, v.i, v.j, v.gain_i, v.gain_j) for v in violations])


class SortingModel(BaseEstimator):
    """Estimator wrapper: ``fit(alpha1)`` solves the sorting equilibrium.

    Parameters mirror :class:`LaborEconomy`; ``alpha1`` is the data.
    """

    def __init__(self, e_S=2.0, k_H=2.0, gamma=0.5, alpha_total=0.8, coworker_gamma=False):
        self.e_S = e_S
        self.k_H = k_H
        self.gamma = gamma
        self.alpha_total = alpha_total
        self.coworker_gamma = coworker_gamma

    def fit(self, alpha1, y=None):
        econ = LaborEconomy(self.e_S, self.k_H, self.gamma, self.alpha_total, np.asarray(alpha1, dtype=float),
                            coworker_gamma=self.coworker_gamma)
        eq = solve_sorting(econ)
        self.equilibrium_ = eq
        self.sorting_ = eq.sorting
        self.alpha1_crit_ = eq.alpha1_crit
        self.firm_high_ = eq.firm_high
        self.wages_ = eq.wages
        return self

    def predict(self, alpha1):
        """Firm type (True for H) a skilled worker with these friend weights would pick."""
        alpha1 = np.asarray(alpha1, dtype=float)
        return alpha1 >= self.alpha1_crit_
