"""Command-line interface.

Structured results go to stdout (or ``--out``) as JSON or CSV; diagnostics go
to stderr.  Exit codes: 0 success, 1 usage error, 2 assumption failure,
3 config parse failure, 4 solver failure, 5 simulation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .generator import hjb_residual
from .levy_core import ConfigError, load_problem, validate
from .simulator import SimConfig, SimulationError, aggregate, parse_strategy, simulate_paths
from .solver import DEFAULT_TOL, NoSignalError, has_signal, SolverError, SweepError, solve_general, sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSUMPTION = 2
EXIT_CONFIG = 3
EXIT_SOLVER = 4
EXIT_SIMULATION = 5

BOUNDARY_GAP = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def manifest(command: str, args: argparse.Namespace, **resolved) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command", "config", "out", "per_path")}
    params.update(resolved)
    return {
        "command": command,
        "config": str(args.config),
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }


def _emit(text: str, out: str | None, man: dict) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    stamped = dict(man, timestamp=datetime.now(timezone.utc).isoformat())
    Path(out + ".manifest.json").write_text(json.dumps(stamped, indent=2) + "\n")


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", out, payload["manifest"])


def _emit_csv(header, rows, comments, man, out) -> None:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    for line in comments:
        buf.write(f"# {line}\n")
    _emit(buf.getvalue(), out, man)


def _no_signal(exc) -> SystemExit:
    print(f"NoSignal: {exc}. Make the types differ in drift, jump rates or jump sizes.", file=sys.stderr)
    return SystemExit(EXIT_SOLVER)


def _load_valid(path, need_signal=False):
    problem = load_problem(path)
    if need_signal and not has_signal(problem):
        # identical types also fail A5; report the more specific cause
        raise _no_signal("types are indistinguishable")
    report = validate(problem)
    if not report.ok:
        print(report.format(), file=sys.stderr)
        raise SystemExit(EXIT_ASSUMPTION)
    return problem


def _solve(problem, args):
    try:
        return solve_general(problem, args.g1, args.g0, args.tol)
    except NoSignalError as exc:
        raise _no_signal(exc)
    except (SolverError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_SOLVER)


def cmd_check(args) -> int:
    problem = load_problem(args.config)
    report = validate(problem)
    print(report.format(), file=sys.stderr)
    payload = {"manifest": manifest("check", args), "report": report.to_dict()}
    _emit_json(payload, args.out)
    return EXIT_OK if report.ok else EXIT_ASSUMPTION


def cmd_solve(args) -> int:
    problem = _load_valid(args.config, need_signal=True)
    sol = _solve(problem, args)
    result = sol.to_dict()
    if args.grid:
        grid = np.linspace(0.0, 1.0, args.grid) if args.grid > 1 else np.array([0.5])
        result["valueTable"] = [[float(p), float(sol.value(p))] for p in grid]
    _emit_json({"manifest": manifest("solve", args), "result": result}, args.out)
    return EXIT_OK


def cmd_hjb_grid(args) -> int:
    if args.points < 1:
        raise UsageError("--points must be positive")
    problem = _load_valid(args.config, need_signal=True)
    sol = _solve(problem, args)
    grid = (np.arange(args.points) + 0.5) / args.points
    rows = []
    active = 0.0
    below_k1 = -np.inf
    for p in grid:
        if abs(p - sol.p_star) <= BOUNDARY_GAP:
            continue
        res0 = hjb_residual(sol, p, 0.0)
        res1 = hjb_residual(sol, p, 1.0)
        if p > sol.p_star:
            branch = "experiment"
            active = max(active, abs(res1))
        else:
            branch = "safe"
            active = max(active, abs(res0))
            below_k1 = max(below_k1, res1)
        rows.append([fmt(p), fmt(res0), fmt(res1), branch])
    comments = [f"pStar={fmt(sol.p_star)}", f"max_active_residual={fmt(active)}"]
    if np.isfinite(below_k1):
        comments.append(f"max_residual_k1_below_cutoff={fmt(below_k1)}")
    man = manifest("hjb-grid", args, pStar=sol.p_star)
    _emit_csv(["p", "residual_k0", "residual_k1", "branch"], rows, comments, man, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    problem = _load_valid(args.config)
    p_star = None
    if args.strategy == "cutoff":
        p_star = _solve(problem, argparse.Namespace(g1=None, g0=None, tol=DEFAULT_TOL)).p_star
    try:
        strategy = parse_strategy(args.strategy, p_star)
        config = SimConfig(dt=args.dt, horizon=args.horizon, paths=args.paths, seed=args.seed,
                           estimator=args.estimator, p0=args.p0, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if config.paths < 2:
        raise UsageError("--paths must be at least 2")
    try:
        batch = simulate_paths(problem, strategy, config)
        result = aggregate(problem, config, batch)
    except SimulationError as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    man = manifest("simulate", args, resolvedStrategy={"label": strategy.label, "edges": list(strategy.edges),
                                                        "values": list(strategy.values)})
    _emit_json({"manifest": man, "result": result.to_dict()}, args.out)
    if args.per_path:
        with open(args.per_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["path", "high", "payoff", "belief", "final_belief"])
            for i in range(batch.payoff.size):
                writer.writerow([i, int(batch.high[i]), fmt(batch.payoff[i]), fmt(batch.belief[i]),
                                 fmt(batch.final_belief[i])])
    return EXIT_OK


def _strictly_increasing(xs) -> bool:
    return all(b > a for a, b in zip(xs, xs[1:]))


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    param = "jumpScale" if args.param == "jump-scale" else args.param
    problem = load_problem(args.config)
    grid = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else np.array([args.start])
    try:
        rows = sweep(problem, param, grid, probe=args.probe, tol=args.tol)
    except SweepError as exc:
        print(f"invalid grid point: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION if not isinstance(exc.__cause__, SolverError) else EXIT_SOLVER
    table = [[fmt(row.value), fmt(row.alpha_star), fmt(row.p_star), fmt(row.p_myopic)] for row in rows]
    alphas = [row.alpha_star for row in rows]
    cutoffs = [row.p_star for row in rows]
    comments = [
        f"alphaStar_strictly_increasing={str(_strictly_increasing(alphas)).lower()}",
        f"pStar_strictly_increasing={str(_strictly_increasing(cutoffs)).lower()}",
        f"pStar_below_pMyopic={str(all(r.p_star < r.p_myopic for r in rows)).lower()}",
    ]
    _emit_csv([args.param, "alphaStar", "pStar", "pMyopic"], table, comments, manifest("sweep", args), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="levybandit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="problem JSON file")
        p.add_argument("--out", help="write output here instead of stdout (a manifest file is written alongside)")
        p.set_defaults(func=func)
        return p

    command("check", cmd_check, "validate the model assumptions")

    def payoffs(p):
        p.add_argument("--g1", type=float, default=None, help="High-type flow payoff (default: High drift)")
        p.add_argument("--g0", type=float, default=None, help="Low-type flow payoff (default: Low drift)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = command("solve", cmd_solve, "closed-form cut-off and value function")
    payoffs(p)
    p.add_argument("--grid", type=int, default=0, help="append an N-point value table")

    p = command("hjb-grid", cmd_hjb_grid, "HJB residuals of the solution on a belief grid (CSV)")
    payoffs(p)
    p.add_argument("--points", type=int, default=1000)

    p = command("simulate", cmd_simulate, "Monte Carlo payoff of a strategy (JSON)")
    p.add_argument("--strategy", default="cutoff",
                   help="cutoff[:c] | always-risky | always-safe | constant:k | table:EDGES/VALUES")
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=None, help="default: exp(-r T) <= 1e-3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=("payoff", "belief", "both"), default="both")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--per-path", help="also write per-path results to this CSV")

    p = command("sweep", cmd_sweep, "comparative statics over one parameter (CSV)")
    p.add_argument("--param", required=True, choices=("r", "sigma", "rho", "jump-scale", "jumpScale"))
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True, help="number of grid points")
    p.add_argument("--probe", type=float, default=0.5, help="belief at which the value is tracked")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
