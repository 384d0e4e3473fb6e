"""Command-line batch runner.

Each subcommand reads one INI config, writes CSV artifacts and a JSON
summary into the output directory and exits with 0 (success), 2 (bad
config or usage), 3 (solver failure) or 4 (acceptance failure).
"""

import argparse
import sys
import time
from pathlib import Path


from . import acceptance
from . import grid_operator as go
from .artifacts import write_csv, write_json
from .capacity import point_capacity_refinement
from .config import load_config
from .errors import ConfigError, ParameterError, SingularEllipticError
from .feynman_kac import verify_solution_mc
from .measures import discretize
from .semilinear import power_bracket, solve_mixed, solve_singular, verify_energy_bound, verify_sup_bound
from .stability import CSV_COLUMNS, run_additive_perturbation, run_mollification_split, run_tv_stability, \
    run_vanishing

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ACCEPT = 0, 2, 3, 4


class _Run:
    """Collects verdicts, timings and artifact paths for one subcommand."""

    def __init__(self, command, cfg, out):
        self.command, self.cfg, self.out = command, cfg, Path(out)
        self.verdicts, self.timings, self.artifacts = [], {}, []
        self._t0 = time.perf_counter()

    def timed(self, label, fn, *args, **kwargs):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        self.timings[label] = time.perf_counter() - t0
        return result

    def csv(self, name, columns, rows):
        self.artifacts.append(str(write_csv(self.out / name, columns, rows)))

    def verdict(self, name, passed, **measured):
        self.verdicts.append({"name": name, "passed": bool(passed), **measured})

    def finish(self, name=None):
        self.timings["total"] = time.perf_counter() - self._t0
        summary = {
            "command": self.command,
            "config_echo": self.cfg.echo() if self.cfg is not None else None,
            "verdicts": self.verdicts,
            "timings": self.timings,
            "artifacts": self.artifacts,
        }
        write_json(self.out / (name or f"{self.command.replace('-', '_')}.json"), summary)
        return summary


def _problem(cfg):
    dom = cfg.domain()
    op = go.assemble(dom, cfg.alpha)
    return dom, op, discretize(cfg.measure_spec(), dom)


def cmd_solve(cfg, run):
    dom, op, mu = _problem(cfg)
    g, h = cfg.nonlinearity(), cfg.second_nonlinearity()
    if h is None:
        sol = run.timed("solve", solve_singular, op, mu, g, cfg.solver_config())
    else:
        sol = run.timed("solve", solve_mixed, op, mu, g, h, cfg.solver_config())
        run.verdict("mixed_bound", sol.diagnostics["bound_holds"], min_slack=sol.diagnostics["bound_min_slack"])
    run.csv("solution.csv", ("x", "u"), zip(dom.nodes, sol.u))
    run.verdict("levels_nondecreasing", sol.diagnostics["levels_nondecreasing"])
    bounds = [("max_u", sol.max)]
    if h is None:
        # the single-power bounds do not apply to a sum of two powers
        sup = verify_sup_bound(sol, op, mu, g.gamma, g.c2)
        en = verify_energy_bound(sol, op, mu, g.gamma, g.c2)
        run.verdict("sup_bound", sup["passed"], max_u=sup["max_u"], bound=sup["bound"], slack=sup["slack"])
        bounds += [("sup_bound", sup["bound"]), ("sup_slack", sup["slack"]), ("energy_ratio", en["ratio"])]
    else:
        bounds += [("mixed_bound_min_slack", sol.diagnostics["bound_min_slack"])]
    bounds += [("n_last", sol.n_last), ("residual", sol.residual), ("bracket_gap", sol.bracket_gap)]
    run.csv("bounds.csv", ("quantity", "value"), bounds)
    return EXIT_OK


def cmd_bracket(cfg, run):
    dom, op, mu = _problem(cfg)
    g = cfg.nonlinearity()
    scfg = cfg.solver_config()
    v, w = run.timed("bracket", power_bracket, op, mu, g.gamma, g.c1, g.c2, scfg)
    u = run.timed("solve", solve_singular, op, mu, g, scfg.up_to(scfg.levels[-1]))
    low, high = u.u - v.u, w.u - u.u
    run.csv("bracket.csv", ("x", "v", "u", "w", "slack_lower", "slack_upper"),
            zip(dom.nodes, v.u, u.u, w.u, low, high))
    run.verdict("bracket", min(low.min(), high.min()) >= -1e-10, min_slack=float(min(low.min(), high.min())))
    return EXIT_OK


def cmd_capacity(cfg, run):
    d = cfg["domain"]
    c = cfg["capacity"]
    rows = run.timed("capacity", point_capacity_refinement, cfg.alpha, c["x0"], c["sizes"], d["a"], d["b"])
    run.csv("capacity.csv", ("N", "value"), rows)
    vals = [v for _, v in rows]
    run.verdict("strictly_decreasing", all(b < a for a, b in zip(vals, vals[1:])), values=vals)
    return EXIT_OK


def cmd_stability(cfg, run):
    mode = cfg.get("stability", "mode")
    g = cfg.nonlinearity()
    scfg = cfg.solver_config()
    radius = cfg.get("stability", "exclusion_radius")
    if mode == "tv":
        dom, op, mu = _problem(cfg)
        spec = cfg.measure_spec()
        perts = [discretize(spec.scaled(1 + 1 / k), dom) for k in range(1, cfg.get("stability", "perturbations") + 1)]
        report = run.timed("stability", run_tv_stability, op, g, mu, perts, scfg)
    else:
        if not cfg.get("schedule", "pairs"):
            raise ConfigError("[schedule.pairs] required for this stability mode", key="schedule.pairs")
        sched = cfg.schedule()
        if mode == "vanishing":
            report = run.timed("stability", run_vanishing, cfg.alpha, g, cfg.measure_spec(), sched, scfg, radius)
        elif mode == "split":
            report = run.timed("stability", run_mollification_split, cfg.alpha, g, cfg.measure_spec(), sched, scfg,
                               radius)
        else:
            report = run.timed("stability", run_additive_perturbation, cfg.alpha, g, cfg.measure_spec(),
                               cfg.singular_spec(), sched, scfg, radius)
    run.csv("stability.csv", CSV_COLUMNS, report.csv_rows())
    for name, ok in report.verdicts.items():
        run.verdict(name, ok)
    if "verdict" in report.params:
        run.verdict(report.params["verdict"], report.params["verdict"] == "vanishing")
    return EXIT_OK


def cmd_mc_verify(cfg, run):
    dom, op, mu = _problem(cfg)
    g = cfg.nonlinearity()
    sol = run.timed("solve", solve_singular, op, mu, g, cfg.solver_config())
    rep = run.timed("walk", verify_solution_mc, sol, op, g, cfg.measure_spec(), cfg.get("mc", "points"),
                    cfg.walk_config())
    cols = ("x", "u_deterministic", "mc_mean", "mc_stderr", "z", "timeout_fraction")
    run.csv("mc.csv", cols, [tuple(r[c] for c in cols) for r in rep["rows"]])
    run.verdict("z_within_3", rep["passed"], max_z=max(r["z"] for r in rep["rows"]))
    return EXIT_OK


def cmd_accept(config_dir, seed, out, criteria=None):
    """Parse every config in ``config_dir`` strictly, then run the acceptance suite."""
    config_dir = Path(config_dir)
    paths = sorted(config_dir.glob("*.ini")) if config_dir.is_dir() else []
    if not paths:
        raise ConfigError(f"no *.ini configs found in {config_dir}", key=str(config_dir))
    configs = {p.name: load_config(p) for p in paths}
    ref = configs.get("accept.ini", next(iter(configs.values())))
    if seed is None:
        seed = ref.get("mc", "seed")
    run = _Run("accept", ref, out)

    def report(res):
        print(res.line(), flush=True)
        run.csv(f"criterion_{res.number:02d}.csv", res.columns, res.rows)
        run.verdicts.append(res.summary())
        run.timings[f"criterion_{res.number:02d}"] = res.seconds

    results = acceptance.run_all(seed, criteria, report, workers=ref.get("mc", "workers"))
    run.finish("accept.json")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPT


COMMANDS = {
    "solve": cmd_solve,
    "bracket": cmd_bracket,
    "capacity": cmd_capacity,
    "stability": cmd_stability,
    "mc-verify": cmd_mc_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="singular-elliptic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", type=Path)
        s.add_argument("--seed", type=int)
    s = sub.add_parser("accept")
    s.add_argument("config_dir", nargs="?", type=Path)
    s.add_argument("--config", type=Path, help="config directory (alternative to the positional argument)")
    s.add_argument("--out", type=Path)
    s.add_argument("--seed", type=int)
    s.add_argument("--criteria", type=lambda v: [int(x) for x in v.split(",")],
                   help="comma-separated subset of criterion numbers")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "accept":
            config_dir = args.config_dir or args.config
            if config_dir is None:
                raise ConfigError("accept needs a config directory")
            bad = [c for c in args.criteria or [] if c not in acceptance.CRITERIA]
            if bad:
                raise ConfigError(f"unknown criteria {bad}")
            return cmd_accept(config_dir, args.seed, args.out or Path("out"), args.criteria)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace("mc", "seed", args.seed)
        run = _Run(args.command, cfg, args.out or Path(cfg.get("output", "dir")))
        code = COMMANDS[args.command](cfg, run)
        run.finish()
        for v in run.verdicts:
            print(f"{v['name']}: {'pass' if v['passed'] else 'fail'}")
        return code
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularEllipticError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
