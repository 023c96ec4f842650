"""Command-line front end.

Subcommands: simulate, ghost, infection, regen, oracle, sweep, verify.
A JSON config file can carry any flag (dashes become underscores);
explicit flags win.  Standard output is exactly one JSON summary object;
human-readable progress goes to standard error.  Exit codes: 0 success,
1 invariant or statistical failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .params import ConfigError, ModelParams, Overrides, RwdreError

log = logging.getLogger("rwdre")

_MODEL_KEYS = ("rho", "p_circ", "p_bullet", "q0", "seed")
_DEFAULTS = {
    "rho": 0.0, "p_circ": 0.75, "p_bullet": 0.25, "q0": 0.0, "seed": 0,
    "steps": 100, "horizon": 200, "replicas": 0, "v_star": "0.5",
    "ell": None, "out": None, "format": "csv", "workers": None,
    "quick": False, "config": None,
}


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rwdre",
        description="random walk in a dynamic environment of lazy walks")
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name: str, help_: str, *flags: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None,
                       help="JSON file of flag values (flags override it)")
        if "model" in flags:
            for f in ("rho", "p-circ", "p-bullet", "q0"):
                p.add_argument(f"--{f}", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        if "steps" in flags:
            p.add_argument("--steps", type=int, default=None)
        if "horizon" in flags:
            p.add_argument("--horizon", type=int, default=None)
        if "replicas" in flags:
            p.add_argument("--replicas", type=int, default=None)
        if "v-star" in flags:
            p.add_argument("--v-star", default=None,
                           help="ballistic slope, e.g. 0.5 or 1/2")
        if "ell" in flags:
            p.add_argument("--ell", type=int, default=None,
                           help="also scan for an empty interval of this scale")
        if "out" in flags:
            p.add_argument("--out", default=None)
            p.add_argument("--format", choices=("csv", "jsonl"), default=None)
        if "workers" in flags:
            p.add_argument("--workers", type=int, default=None)
        return p

    cmd("simulate", "walker path from the origin", "model", "steps", "ell", "out")
    cmd("ghost", "homogeneous walk on the same uniform field", "model", "steps", "out")
    cmd("infection", "front of the particle infection", "model", "horizon", "out")
    cmd("regen", "regenerative speed and waiting-time tail",
        "model", "horizon", "replicas", "v-star", "out")
    cmd("oracle", "exact endpoint law (with optional Monte Carlo check)",
        "model", "steps", "replicas", "out")
    cmd("sweep", "parameter-grid speed sweep", "out", "workers")
    v = cmd("verify", "run the invariant suites")
    v.add_argument("--quick", action="store_true", default=None)
    return top


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    return raw


def _merge(args: argparse.Namespace, allowed: set[str], **overrides) -> dict:
    """Config-file values under explicit flags, defaults at the bottom.

    ``overrides`` replace the shared built-in defaults for one command
    (the oracle wants few steps, the regen horizon is long, ...).
    """
    cfg = _load_config(args.config)
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**_DEFAULTS, **overrides}
    merged.update(cfg)
    for key, val in vars(args).items():
        if key not in ("command", "config") and val is not None:
            merged[key] = val
    return merged


def _params(opt: dict) -> ModelParams:
    return ModelParams(float(opt["rho"]), float(opt["p_circ"]),
                       float(opt["p_bullet"]), float(opt["q0"]),
                       seed=int(opt["seed"]))


def _write_rows(rows, opt: dict, title: str) -> list[str]:
    """The report path: the delimited file plus its sibling figure."""
    from . import report

    out = opt["out"]
    if opt["format"] == "jsonl":
        report.write_path_jsonl(rows, out)
    else:
        report.write_path_csv(rows, out)
    fig = report.path_figure([(title, rows)], report.sibling_figure_path(out),
                             title=title)
    log.info("wrote %s and %s", out, fig)
    return [out, fig]


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "steps", "ell", "out", "format"})
    params = _params(opt)
    steps = int(opt["steps"])
    from .walker import NoEmptyIntervalError, find_empty_interval, run_walker

    path = run_walker(params, steps)
    summary = {"command": "simulate", "params": params.to_dict(),
               "steps": steps, "endpoint": path.endpoint(),
               "speed": path.endpoint() / steps if steps else 0.0,
               "files": []}
    if opt["ell"] is not None:
        ell = int(opt["ell"])
        try:
            scan = find_empty_interval(params, ell, search_bound=200 * ell)
            summary["empty_interval"] = {"ell": ell, "hat_z": scan.hat_z,
                                         "x_minus": scan.x_minus}
        except NoEmptyIntervalError:
            summary["empty_interval"] = None
    if opt["out"]:
        summary["files"] = _write_rows(path.rows(), opt, "walker")
    return 0, summary


def _cmd_ghost(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "steps", "out", "format"})
    params = _params(opt)
    steps = int(opt["steps"])
    from .walker import run_ghost

    path = run_ghost(params, steps)
    summary = {"command": "ghost", "params": params.to_dict(), "steps": steps,
               "endpoint": path.endpoint(),
               "speed": path.endpoint() / steps if steps else 0.0, "files": []}
    if opt["out"]:
        summary["files"] = _write_rows(path.rows(), opt, "ghost")
    return 0, summary


def _cmd_infection(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "horizon", "out", "format"})
    params = _params(opt)
    horizon = int(opt["horizon"])
    from .infection import run_infection

    front, state = run_infection(params, horizon)
    summary = {"command": "infection", "params": params.to_dict(),
               "horizon": horizon, "front_endpoint": front.endpoint(),
               "front_speed": front.endpoint() / horizon if horizon else 0.0,
               "infected": len(state.infected), "files": []}
    if opt["out"]:
        summary["files"] = _write_rows(front.rows(), opt, "infection front")
    return 0, summary


def _cmd_regen(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "horizon", "replicas", "v_star",
                        "out", "format"}, horizon=5000,
                 rho=0.1, p_circ=0.9, p_bullet=0.5)
    params = _params(opt)
    horizon = int(opt["horizon"])
    target = int(opt["replicas"]) or 1000
    from .estimators import lag1_autocorrelation, regenerative_estimates, split_half_ks

    rep = regenerative_estimates(params, opt["v_star"], horizon, target)
    summary = {"command": "regen", "params": params.to_dict(),
               **rep.to_dict(), "files": []}
    if rep.sufficient:
        d, p = split_half_ks(rep.dx)
        summary["diagnostics"] = {
            "ks_halves": {"statistic": d, "pvalue": p},
            "lag1_autocorr": lag1_autocorrelation(rep.dx, rep.replica_slices)}
    if opt["out"]:
        from . import report

        out = opt["out"]
        report.write_survival_csv(rep.survival, out)
        fig = report.survival_figure(rep.survival,
                                     report.sibling_figure_path(out))
        summary["files"] = [out, fig]
        log.info("wrote %s and %s", out, fig)
    if not rep.sufficient:
        log.error("only %d completed cycles (need 10): insufficient "
                  "regenerations", rep.cycles)
        return 1, summary
    return 0, summary


def _cmd_oracle(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "steps", "replicas", "out", "format",
                        "particles"}, steps=4)
    params = _params(opt)
    steps = int(opt["steps"])
    from .oracle import empirical_pmf, exact_pmf_poisson, exact_walker_pmf, tv_distance

    particles = opt.get("particles")
    if particles is not None:
        config = {int(z): int(c) for z, c in dict(particles).items()}
        ov = Overrides(config=config)
        pmf = exact_walker_pmf(params, steps, ov)
    else:
        ov = None
        pmf = exact_pmf_poisson(params, steps)
    summary = {"command": "oracle", "params": params.to_dict(), "n": steps,
               "method": pmf.method, "mass_defect": pmf.mass_defect,
               "pmf": {str(x): p for x, p in pmf.rows()}, "files": []}
    replicas = int(opt["replicas"])
    if replicas > 0:
        import numpy as np

        from .engines import batch_paths_config, replica_seeds
        from . import randomness as rnd

        seeds = replica_seeds(params.seed, rnd.REPLICA, replicas)
        if ov is not None:
            ends = batch_paths_config(params, seeds, steps, ov)
        else:
            from .walker import run_walker

            ends = np.array([run_walker(params.with_seed(int(s)), steps).endpoint()
                             for s in seeds])
        summary["tv_monte_carlo"] = tv_distance(pmf.as_dict(),
                                                empirical_pmf(ends))
        summary["mc_replicas"] = replicas
    if opt["out"]:
        from . import report

        out = opt["out"]
        report.write_path_csv(pmf.rows(), out)
        fig_path = report.sibling_figure_path(out)
        _pmf_figure(pmf, fig_path)
        summary["files"] = [out, fig_path]
        log.info("wrote %s and %s", out, fig_path)
    return 0, summary


def _pmf_figure(pmf, out: str) -> None:
    from . import report

    fig, ax = report.plt.subplots(figsize=(5.6, 4.0))
    xs = [x for x, _ in pmf.rows()]
    ps = [p for _, p in pmf.rows()]
    ax.bar(xs, ps, width=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("probability")
    ax.set_title(f"endpoint law, n={pmf.n} ({pmf.method})")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    report.plt.close(fig)


def _cmd_sweep(args) -> tuple[int, dict]:
    from .sweep import SweepConfig, run_sweep

    cfg_dict = _load_config(args.config)
    if args.seed is not None:
        cfg_dict["master_seed"] = args.seed
    if args.out is not None:
        cfg_dict["out"] = args.out
    cfg = SweepConfig.from_dict(cfg_dict)
    result = run_sweep(cfg, workers=args.workers)
    log.info("swept %d grid points in %.1fs", len(result.rows),
             result.manifest["timing"]["total_s"])
    summary = {"command": "sweep", "rows": len(result.rows),
               "rows_sha256": result.determinism_hash(), "files": []}
    if cfg.out:
        paths = result.save(cfg.out, csv=(args.format == "csv"))
        if result.rows:
            from . import report

            paths.append(report.phase_diagram_figure(
                result, report.sibling_figure_path(cfg.out + ".jsonl")))
        summary["files"] = paths
        log.info("wrote %s", ", ".join(paths))
    return 0, summary


def _cmd_verify(args) -> tuple[int, dict]:
    opt = _merge(args, {*_MODEL_KEYS, "quick"})
    from .verify import run_all

    quick = bool(opt["quick"])
    suites = run_all(int(opt["seed"]), quick=quick)
    for s in suites:
        log.info("%-28s checked=%-5d violations=%d", s.name, s.checked,
                 s.violations)
    ok = all(s.ok for s in suites)
    summary = {"command": "verify", "quick": quick, "ok": ok,
               "suites": [s.to_dict() for s in suites]}
    return (0 if ok else 1), summary


_HANDLERS = {
    "simulate": _cmd_simulate,
    "ghost": _cmd_ghost,
    "infection": _cmd_infection,
    "regen": _cmd_regen,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    # force: re-entrant calls (tests, embedding) must bind the current stderr
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s", force=True)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, summary = _HANDLERS[args.command](args)
    except (ConfigError, RwdreError) as e:
        log.error("%s", e)
        return 2
    print(json.dumps(summary, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
