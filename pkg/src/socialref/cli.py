"""Command-line entry point: ``socialref <subcommand> [flags]``.

Values given as flags override the same fields in a ``--config`` JSON
file, which in turn override built-in defaults.  Every run writes its
outputs plus ``manifest.json`` describing the resolved configuration.
Exit status: 0 on success, 1 on a model or parameter error, 2 on a usage
error.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import SocialRefError
from .game import EquilibriumParams
from .io import read_network, read_vector_csv, to_jsonable, write_json, write_table
from .labor import LaborEconomy, check_pairwise_stability, solve_sorting, write_violations
from .linear_game import stochastic_dominance_check
from .mccall import (EndogenousConfig, McCallProblem, default_problem, reservation_wage_endogenous,
                     reservation_wage_exogenous)
from .network import bonacich
from .nonlinear_game import FixedPointConfig, solve
from .portfolio import (PortfolioProblem, PortfolioResult, QuadraticParams, foc_residuals,
                        lambda_closed_form, solve_portfolio)
from .simulation import SimulationConfig, run_simulation, write_outputs
from .utility import make_utility, utility_from_dict

log = logging.getLogger("socialref")

PAPER_DEFAULTS = {"n_agents": 50, "link_prob": 0.2, "alpha_low": 0.4, "alpha_high": 0.8,
                  "Z": 100.0, "beta": 0.98, "theta": 0.25, "n_networks": 1000}


class UsageError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    if "subcommand" in cfg and isinstance(cfg.get("config"), dict):
        # a previous run's manifest: replay its inputs and resolved settings
        flat = dict(cfg.get("inputs", {}))
        flat.update(cfg["config"])
        flat.update(cfg["config"].get("simulation", {}))
        if cfg.get("seed") is not None:
            flat.setdefault("seed", cfg["seed"])
        return flat
    return cfg


def _pick(args, cfg, name, default=None, key=None):
    """Flag value if given, else config value, else ``default``."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(key or name, default)


def _out_paths(out, default_name):
    """``--out`` may name a file (has a suffix) or a directory."""
    p = Path(out)
    if p.suffix:
        p.parent.mkdir(parents=True, exist_ok=True)
        return p.parent, p
    p.mkdir(parents=True, exist_ok=True)
    return p, p / default_name


def _params(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


def _utility(args, cfg, default="sqrt"):
    family = _pick(args, cfg, "utility", default)
    if isinstance(family, dict):
        spec = utility_from_dict(family)
        return spec.with_inner(args.inner) if getattr(args, "inner", None) else spec
    params = dict(cfg.get("utility_params", {}))
    params.update(_params(getattr(args, "param", None)))
    inner = _pick(args, cfg, "inner", None)
    return make_utility(family, inner=inner, **params)


def _equilibrium_params(args, cfg, default_utility="sqrt"):
    return EquilibriumParams(float(_pick(args, cfg, "cost", 1.0)),
                             float(_pick(args, cfg, "link_benefit", 0.0, "link_benefit")),
                             _utility(args, cfg, default_utility))


def _network_and_alpha(args, cfg):
    net_path = _pick(args, cfg, "network")
    alpha_path = _pick(args, cfg, "alpha")
    if net_path is None or alpha_path is None:
        raise UsageError("--network and --alpha are required")
    net = read_network(net_path, normalize=bool(cfg.get("normalize", False)))
    return net, read_vector_csv(alpha_path), {"network": str(net_path), "alpha": str(alpha_path)}


# subcommands return (resolved config, inputs, list of written paths)

def cmd_centrality(args, cfg):
    net, alpha, inputs = _network_and_alpha(args, cfg)
    outdir, path = _out_paths(args.out, "centrality.csv")
    res = bonacich(net, alpha)
    write_table(path, ["agent", "alpha", "centrality"],
                [(i, alpha[i], res.centrality[i]) for i in range(net.n)])
    return outdir, {"alpha_bar": res.alpha_bar}, inputs, [path]


def _cmd_equilibrium(args, cfg, nonlinear):
    net, alpha, inputs = _network_and_alpha(args, cfg)
    params = _equilibrium_params(args, cfg)
    outdir, path = _out_paths(args.out, "equilibrium.csv")
    if nonlinear:
        config = FixedPointConfig(max_iterations=int(_pick(args, cfg, "max_iter", 10_000)),
                                  tol=float(_pick(args, cfg, "tol", 1e-10)), trace=args.verbose)
        res = solve(net, alpha, params, config, method="fixed-point")
    else:
        res = solve(net, alpha, params, method="closed-form")
    res.write_csv(path)
    written = [path, outdir / "summary.json"]
    res.write_json(written[1])
    if nonlinear and args.verbose:
        written.append(outdir / "trace.csv")
        res.write_trace(written[-1])
    resolved = {"cost": params.cost, "link_benefit": params.link_benefit,
                "utility": params.utility.to_dict()}
    return outdir, resolved, inputs, written


def cmd_equilibrium(args, cfg):
    return _cmd_equilibrium(args, cfg, nonlinear=False)


def cmd_equilibrium_nonlinear(args, cfg):
    if getattr(args, "inner", None) is None and "inner" not in cfg:
        args.inner = "log1p"
    return _cmd_equilibrium(args, cfg, nonlinear=True)


def _mccall_problem(args, cfg):
    if "dist" in cfg or "utility" in cfg:
        d = dict(cfg)
        if args.beta is not None:
            d["beta"] = args.beta
        return McCallProblem.from_dict(d)
    return default_problem(float(_pick(args, cfg, "beta", 0.98)), float(_pick(args, cfg, "Z", 100.0)),
                           float(_pick(args, cfg, "theta", 0.25)))


def cmd_mccall(args, cfg):
    problem = _mccall_problem(args, cfg)
    outdir, path = _out_paths(args.out, "reservation_wages.csv")
    inputs = {}
    if args.network or cfg.get("network"):
        net, alpha, inputs = _network_and_alpha(args, cfg)
        res = reservation_wage_endogenous(problem, net, alpha,
                                          EndogenousConfig(tol=float(_pick(args, cfg, "tol", 1e-10))))
    else:
        R = args.R if args.R is not None else cfg.get("R", [0.0])
        res = reservation_wage_exogenous(problem, np.atleast_1d(np.asarray(R, dtype=float)))
    res.write_csv(path)
    resolved = problem.to_dict()
    if not inputs:
        resolved["R"] = res.R.tolist()
    return outdir, resolved, inputs, [path]


def cmd_simulate(args, cfg):
    # precedence: config file < --paper-defaults < explicit flags
    base = {k: v for k, v in cfg.items() if k in SimulationConfig.__dataclass_fields__}
    if args.paper_defaults:
        base.update(PAPER_DEFAULTS)
    if args.networks is not None:
        base["n_networks"] = args.networks
    if args.seed is not None:
        base["seed"] = args.seed
    config = SimulationConfig(**base)
    workers = int(_pick(args, cfg, "workers", 1))
    t0 = time.perf_counter()
    res = run_simulation(config, workers=workers)
    log.info("simulated %d networks in %.1fs", config.n_networks, time.perf_counter() - t0)
    outdir = Path(args.out)
    write_outputs(res, outdir, sort_scatter=args.sort_scatter)
    if args.verbose:
        print(res.fit_no_constant.summary("OLS regression: no constant"))
        if res.fit_constant is not None:
            print(res.fit_constant.summary("OLS regression: with constant"))
    names = ["records.csv", "scatter_centrality.csv", "scatter_alpha.csv",
             "regression_no_constant.txt", "regression_constant.txt", "summary.json"]
    return outdir, {"simulation": config.__dict__, "workers": workers}, {}, [outdir / n for n in names]


def cmd_portfolio(args, cfg):
    net, alpha, inputs = _network_and_alpha(args, cfg)
    d = {"wealth": 10.0, "returns": [0.7, 1.1, 1.5], "probs": [0.25, 0.5, 0.25],
         "utility": {"family": "quadratic", "params": {"a0": 0.0, "a1": 1.0, "a2": -0.05}}}
    d.update({k: v for k, v in cfg.items() if k in ("wealth", "returns", "probs", "utility", "r_f")})
    problem = PortfolioProblem.from_dict(d)
    outdir, path = _out_paths(args.out, "portfolio.csv")
    if problem.utility.family == "quadratic":
        quad = QuadraticParams(**problem.utility.params)
        lam = lambda_closed_form(problem, quad, net, alpha)
        res = PortfolioResult(lam, foc_residuals(problem, net, alpha, lam), alpha, "closed-form")
    else:
        res = solve_portfolio(problem, net, alpha)
    res.write_csv(path)
    return outdir, problem.to_dict(), inputs, [path]


def cmd_sorting(args, cfg):
    d = {"e_S": 2.0, "k_H": 2.0, "gamma": 0.5, "alpha_total": 0.8,
         "alpha1": {"n_workers": 100, "seed": 0}}
    d.update(cfg)
    for flag, key in (("e_S", "e_S"), ("k_H", "k_H"), ("gamma", "gamma"), ("alpha_total", "alpha_total")):
        v = getattr(args, flag)
        if v is not None:
            d[key] = v
    if args.seed is not None and isinstance(d.get("alpha1"), dict):
        d["alpha1"] = dict(d["alpha1"], seed=args.seed)
    econ = LaborEconomy.from_dict(d)
    eq = solve_sorting(econ)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    eq.write_csv(outdir / "assignment.csv")
    eq.write_json(outdir / "summary.json")
    return outdir, econ.to_dict(), {}, [outdir / "assignment.csv", outdir / "summary.json"]


def cmd_stability(args, cfg):
    net_path = _pick(args, cfg, "network")
    wage_path = _pick(args, cfg, "wages")
    if net_path is None or wage_path is None:
        raise UsageError("--network and --wages are required")
    G = _read_friend_weights(net_path)
    wages = read_vector_csv(wage_path)
    mode = _pick(args, cfg, "mode", "own-wage")
    eps = float(_pick(args, cfg, "epsilon", 1e-3))
    viol = check_pairwise_stability(G, wages, alpha1=G.sum(axis=1), epsilon=eps, mode=mode)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_violations(outdir / "violations.csv", viol)
    write_json(outdir / "stability.json", {"stable": not viol, "n_violations": len(viol), "mode": mode})
    if args.verbose:
        print("stable" if not viol else f"{len(viol)} violation(s)")
    return (outdir, {"mode": mode, "epsilon": eps}, {"network": str(net_path), "wages": str(wage_path)},
            [outdir / "violations.csv", outdir / "stability.json"])


def _read_friend_weights(path):
    # friendship weights need not be row-stochastic, so read the raw matrix
    import csv
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            doc = json.load(fh)
        G = np.zeros((int(doc["n"]), int(doc["n"])))
        for i, j, w in doc.get("edges", []):
            G[int(i), int(j)] = float(w)
        return G
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    return np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)


def cmd_dominance(args, cfg):
    pa, pb = _pick(args, cfg, "alpha_a"), _pick(args, cfg, "alpha_b")
    if pa is None or pb is None:
        raise UsageError("--alpha-a and --alpha-b are required")
    params = _equilibrium_params(args, cfg)
    rep = stochastic_dominance_check(read_vector_csv(pa), read_vector_csv(pb), params,
                                     grid_size=int(_pick(args, cfg, "grid", 512)))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    verdict = {"b_fosd_a": rep.b_fosd_a, "a_fosd_b": rep.a_fosd_b,
               "b_sosd_a": rep.b_sosd_a, "a_sosd_b": rep.a_sosd_b}
    write_json(outdir / "dominance.json", verdict)
    write_table(outdir / "cdfs.csv", ["x", "cdf_a", "cdf_b", "icdf_a", "icdf_b"],
                zip(rep.grid, rep.cdf_a, rep.cdf_b, rep.icdf_a, rep.icdf_b))
    if args.verbose:
        print(json.dumps(verdict, sort_keys=True))
    resolved = {"cost": params.cost, "link_benefit": params.link_benefit, "utility": params.utility.to_dict(),
                "grid": int(_pick(args, cfg, "grid", 512))}
    return (outdir, resolved, {"alpha_a": str(pa), "alpha_b": str(pb)},
            [outdir / "dominance.json", outdir / "cdfs.csv"])


def _add_common(p):
    p.add_argument("--config", help="JSON file with default values for this subcommand")
    p.add_argument("--out", default=".", help="output directory (or file for single-table commands)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--verbose", action="store_true")


def _add_game_flags(p):
    p.add_argument("--network", help="network CSV (n header + matrix) or JSON edge list")
    p.add_argument("--alpha", help="reference strengths, one per line")
    p.add_argument("--cost", type=float)
    p.add_argument("--link-benefit", dest="link_benefit", type=float)
    p.add_argument("--utility", help="utility family (sqrt, power, crra, cara, log-shifted, quadratic)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="utility parameter")


def build_parser():
    parser = argparse.ArgumentParser(prog="socialref", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("centrality", help="Bonacich centralities")
    _add_common(p)
    p.add_argument("--network", required=True)
    p.add_argument("--alpha", required=True)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("equilibrium", help="closed-form equilibrium (linear comparison)")
    _add_common(p)
    _add_game_flags(p)
    p.set_defaults(func=cmd_equilibrium, inner=None)

    p = sub.add_parser("equilibrium-nonlinear", help="fixed-point equilibrium with an inner transform")
    _add_common(p)
    _add_game_flags(p)
    p.add_argument("--inner", help="inner transform (identity, log1p, saturating)")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_equilibrium_nonlinear)

    p = sub.add_parser("mccall", help="reservation wages (exogenous R or network equilibrium)")
    _add_common(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--Z", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--R", type=float, nargs="+", help="reference points (exogenous case)")
    p.add_argument("--network")
    p.add_argument("--alpha")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_mccall)

    p = sub.add_parser("simulate-mccall", help="Monte Carlo reservation-wage regressions")
    _add_common(p)
    p.add_argument("--paper-defaults", action="store_true", dest="paper_defaults",
                   help="50 agents, p=0.2, alpha~U[0.4,0.8], Z=100, beta=0.98, f=z^0.25, 1000 networks")
    p.add_argument("--networks", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--sort-scatter", action="store_true", dest="sort_scatter")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("portfolio", help="equilibrium equity shares")
    _add_common(p)
    p.add_argument("--network")
    p.add_argument("--alpha")
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("sorting", help="labour-market sorting equilibrium")
    _add_common(p)
    p.add_argument("--e-S", dest="e_S", type=float)
    p.add_argument("--k-H", dest="k_H", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha-total", dest="alpha_total", type=float)
    p.set_defaults(func=cmd_sorting)

    p = sub.add_parser("stability", help="pairwise-stability violations of a friendship network")
    _add_common(p)
    p.add_argument("--network")
    p.add_argument("--wages")
    p.add_argument("--mode", choices=["own-wage", "proportional"])
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("dominance", help="stochastic dominance of equilibrium consumption")
    _add_common(p)
    p.add_argument("--alpha-a", dest="alpha_a")
    p.add_argument("--alpha-b", dest="alpha_b")
    p.add_argument("--cost", type=float)
    p.add_argument("--link-benefit", dest="link_benefit", type=float)
    p.add_argument("--utility")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--grid", type=int)
    p.set_defaults(func=cmd_dominance, inner=None)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = _load_config(args.config)
        outdir, resolved, inputs, written = args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"socialref {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SocialRefError, ValueError, ArithmeticError, OSError) as exc:
        print(f"socialref {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "subcommand": args.command,
        "config": resolved,
        "config_file": args.config,
        "inputs": inputs,
        "outputs": [str(p) for p in written],
        "seed": args.seed,
        "version": __version__,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "duration_seconds": round(time.perf_counter() - t0, 3),
    }
    write_json(Path(outdir) / "manifest.json", to_jsonable(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main())
