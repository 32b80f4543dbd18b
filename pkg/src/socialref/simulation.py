"""Monte Carlo experiment: reservation wages against centrality and reference strength.

Each network draws a directed random graph, reference strengths and the
equilibrium reservation wages, then all agents are pooled and ``w_bar`` is
regressed on ``(C_b, alpha)`` with and without a constant.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import ParameterError, RankDeficientError, SocialRefError
from .io import write_json, write_table
from .mccall import EndogenousConfig, default_problem, reservation_wage_endogenous
from .network import bonacich, erdos_renyi_row_normalized
from .ols import ols

log = logging.getLogger(__name__)

RECORD_HEADER = ["network", "agent", "alpha", "centrality", "w_bar"]


@dataclass(frozen=True)
class SimulationConfig:
    n_agents: int = 50
    link_prob: float = 0.2
    alpha_low: float = 0.4
    alpha_high: float = 0.8
    Z: float = 100.0
    beta: float = 0.98
    theta: float = 0.25
    n_networks: int = 1000
    seed: int = 0
    alpha_constant: Optional[float] = None
    max_retries: int = 3
    tol: float = 1e-10

    def __post_init__(self):
        if self.n_agents < 2 or self.n_networks < 1:
            raise ParameterError("need n_agents >= 2 and n_networks >= 1")
        if not 0 <= self.alpha_low <= self.alpha_high < 1:
            raise ParameterError("need 0 <= alpha_low <= alpha_high < 1")
        if self.alpha_constant is not None and not 0 <= self.alpha_constant < 1:
            raise ParameterError("constant alpha must lie in [0, 1)")
        if self.max_retries < 0:
            raise ParameterError("max_retries must be non-negative")

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return SimulationConfig(**d)


@dataclass
class SimulationResult:
    config: SimulationConfig
    records: np.ndarray  # columns: network, agent, alpha, centrality, w_bar
    fit_no_constant: object
    fit_constant: object  # None when the design with a constant is collinear
    failures: list = field(default_factory=list)

    def summary(self):
        return {
            "config": asdict(self.config),
            "n_records": int(self.records.shape[0]),
            "failures": self.failures,
            "no_constant": self.fit_no_constant.to_dict(),
            "constant": self.fit_constant.to_dict() if self.fit_constant is not None else None,
        }


def network_seed(master, index, attempt):
    """Independent stream for network ``index``; adding networks never moves earlier ones."""
    return np.random.SeedSequence(master, spawn_key=(index, attempt))


def simulate_network(config, index):
    """Rows ``(network, agent, alpha, C_b, w_bar)`` for one network, plus failed attempts."""
    problem = default_problem(config.beta, config.Z, config.theta)
    failures = []
    for attempt in range(config.max_retries + 1):
        rng = np.random.default_rng(network_seed(config.seed, index, attempt))
        try:
            net = erdos_renyi_row_normalized(config.n_agents, config.link_prob, seed=rng)
            if config.alpha_constant is None:
                alpha = rng.uniform(config.alpha_low, config.alpha_high, config.n_agents)
            else:
                alpha = np.full(config.n_agents, config.alpha_constant)
            cb = bonacich(net, alpha).centrality
            res = reservation_wage_endogenous(problem, net, alpha, EndogenousConfig(tol=config.tol))
        except SocialRefError as exc:
            log.warning("network %d attempt %d failed: %s", index, attempt, exc)
            failures.append({"network": index, "attempt": attempt, "error": str(exc)})
            continue
        rows = np.column_stack([np.full(config.n_agents, index), np.arange(config.n_agents),
                                alpha, cb, res.w_bar])
        return rows, failures
    raise SocialRefError(f"network {index}: all {config.max_retries + 1} attempts failed; "
                         f"last error: {failures[-1]['error']}")


def _one(args):
    return simulate_network(*args)


def run_simulation(config=None, workers=1):
    """Run every network (in parallel when ``workers > 1``) and fit both regressions.

    Results are merged in network order, so the output does not depend on
    the number of workers.
    """
    config = SimulationConfig() if config is None else config
    jobs = [(config, k) for k in range(config.n_networks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        out = [_one(j) for j in jobs]
    records = np.vstack([rows for rows, _ in out])
    failures = [f for _, fs in out for f in fs]
    X, y = records[:, 2:4][:, ::-1], records[:, 4]
    names = ["centrality", "alpha"]
    if config.alpha_constant is not None:
        X, names = X[:, :1], names[:1]
    fit0 = ols(X, y, intercept=False, names=names)
    try:
        fit1 = ols(X, y, intercept=True, names=names)
    except RankDeficientError:
        if config.alpha_constant is None:
            raise
        # constant alpha makes centrality constant too, so only the no-constant fit is identified
        log.warning("with-constant regression skipped: centrality is collinear with the constant")
        fit1 = None
    return SimulationResult(config, records, fit0, fit1, failures)


def record_rows(records):
    return [(int(r[0]), int(r[1]), r[2], r[3], r[4]) for r in records]


def write_records(path, records):
    write_table(path, RECORD_HEADER, record_rows(records))


def export_scatter(records, outdir, sort=False):
    """Write ``(centrality, w_bar)`` and ``(alpha, w_bar)`` pairs; returns both paths."""
    records = np.asarray(records)
    if records.size == 0:
        raise ParameterError("no records to export")
    outdir = Path(outdir)
    paths = []
    for col, name in ((3, "centrality"), (2, "alpha")):
        pairs = records[:, [col, 4]]
        if sort:
            pairs = pairs[np.argsort(pairs[:, 0], kind="stable")]
        p = outdir / f"scatter_{name}.csv"
        write_table(p, [name, "w_bar"], pairs.tolist())
        paths.append(p)
    return tuple(paths)


def write_outputs(result, outdir, sort_scatter=False):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_records(outdir / "records.csv", result.records)
    export_scatter(result.records, outdir, sort=sort_scatter)
    (outdir / "regression_no_constant.txt").write_text(
        result.fit_no_constant.summary("OLS regression: no constant") + "\n")
    text = ("OLS regression: with constant\nnot identified (regressors collinear with the constant)"
            if result.fit_constant is None else result.fit_constant.summary("OLS regression: with constant"))
    (outdir / "regression_constant.txt").write_text(text + "\n")
    write_json(outdir / "summary.json", result.summary())
    return outdir
