"""Command-line front end.

Usage::

    l2penalty solve --problem hs6 --solver r2n-lbfgs --json out.json --trace out.csv
    l2penalty solve --all --solver r2 --json all.json
    l2penalty profile --metric nf r2.json lbfgs.json > profile.csv

Exit codes of ``solve``: 0 first-order point, 2 infeasible stationary point,
3 iteration or time budget exhausted, 1 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from .penalty import OuterConfig, SolveReport, SolveStatus, solve
from .profiles import METRICS, performance_profile
from .registry import UnknownProblemError, load_qp_json, registry_get, registry_names
from .subsolvers import TraceRecord

__all__ = ["main", "record_from_report"]

SOLVERS = ("r2", "r2n-lbfgs", "r2n-lsr1")
EXIT = {
    SolveStatus.FIRST_ORDER: 0,
    SolveStatus.INFEASIBLE_STATIONARY: 2,
    SolveStatus.MAX_ITER: 3,
    SolveStatus.TIME_LIMIT: 3,
}
RECORD_KEYS = ("problem", "solver", "status", "x", "y_ls", "kkt_residual", "feasibility",
               "tau_final", "outer_iters", "inner_iters", "n_f", "n_grad", "n_c", "n_jac",
               "wall_time_s")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def record_from_report(problem: str, solver: str, rep: SolveReport, config=None) -> dict:
    rec = {
        "problem": problem,
        "solver": solver,
        "status": rep.status.value,
        "x": rep.x.tolist(),
        "y_ls": rep.y_ls.tolist(),
        "kkt_residual": rep.kkt_residual,
        "feasibility": rep.feasibility,
        "tau_final": rep.tau_final,
        "outer_iters": rep.outer_iters,
        "inner_iters": rep.total_inner_iters,
        **rep.counters.as_dict(),
        "wall_time_s": rep.wall_time_s,
    }
    if config is not None:
        rec["config"] = config
    return rec


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="l2penalty", description="Exact l2-penalty solver.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve registry or JSON problems")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", help="registry name; see --list")
    src.add_argument("--all", action="store_true", help="every registry problem")
    src.add_argument("--qp", metavar="FILE", help='JSON with keys "Q", "g", "A", "b", "x0"')
    src.add_argument("--list", action="store_true", help="print registry names and exit")
    s.add_argument("--solver", choices=SOLVERS, default="r2")
    s.add_argument("--tol", type=float, default=1e-3, help="final tolerance (default 1e-3)")
    s.add_argument("--tau0", type=float, default=500.0)
    s.add_argument("--max-time", type=float, default=300.0, help="seconds per problem")
    s.add_argument("--json", metavar="PATH", help="write result record(s) here")
    s.add_argument("--trace", metavar="PATH", help="write the inner iteration trace as CSV")
    s.add_argument("--seed", type=int, default=0,
                   help="recorded only; the solver path is deterministic")

    pr = sub.add_parser("profile", help="performance-profile data from result files")
    pr.add_argument("--metric", choices=sorted(METRICS), default="nf")
    pr.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    pr.add_argument("paths", nargs="+", metavar="RESULT.json")
    return parser


def _setup_logging():
    level = os.environ.get("SOLVER_LOG", "").lower()
    if level in ("debug", "info"):
        logging.basicConfig(stream=sys.stderr, level=level.upper(),
                            format="%(levelname)s %(name)s: %(message)s")


def _write_trace(path, runs):
    fields = ["problem", "k", *TraceRecord.FIELDS]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for name, rep in runs:
            for k, trace in enumerate(rep.inner_traces):
                for rec in trace:
                    w.writerow({"problem": name, "k": k, **rec.as_dict()})


def _cmd_solve(args) -> int:
    if args.list:
        print("\n".join(registry_names()))
        return 0
    if args.tol <= 0 or args.tau0 <= 0 or args.max_time <= 0:
        raise UsageError("--tol, --tau0 and --max-time must be positive")
    if args.all:
        problems = [registry_get(n) for n in registry_names()]
    elif args.qp:
        try:
            problems = [load_qp_json(args.qp)]
        except (OSError, ValueError, KeyError) as e:
            raise UsageError(f"cannot read {args.qp}: {e}") from e
    else:
        try:
            problems = [registry_get(args.problem)]
        except UnknownProblemError as e:
            raise UsageError(str(e)) from e

    cfg = OuterConfig(tau0=args.tau0, eps_final=args.tol, max_time_s=args.max_time)
    config = {"tol": args.tol, "tau0": args.tau0, "max_time_s": args.max_time, "seed": args.seed}
    records, runs, code = [], [], 0
    for p in problems:
        rep = solve(p, cfg, solver=args.solver)
        runs.append((p.name, rep))
        records.append(record_from_report(p.name, args.solver, rep, config))
        code = max(code, EXIT[rep.status])
        print(f"{p.name}: {rep.status.value} kkt={rep.kkt_residual:.2e} "
              f"|c|={rep.feasibility:.2e} n_f={rep.counters.n_f}", file=sys.stderr)

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(records[0] if len(records) == 1 else records, fh, indent=2)
    if args.trace:
        _write_trace(args.trace, runs)
    return code


def _load_records(paths):
    out = []
    for path in paths:
        with open(path) as fh:
            data = json.load(fh)
        out.extend(data if isinstance(data, list) else [data])
    return out


def _cmd_profile(args) -> int:
    try:
        curves = performance_profile(_load_records(args.paths), args.metric)
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(str(e)) from e
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["solver", "ratio", "fraction"])
        for solver, pts in curves.items():
            for t, frac in pts:
                w.writerow([solver, repr(t), repr(frac)])
    finally:
        if args.out:
            fh.close()
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging()
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_profile(args)
    except UsageError as e:
        print(f"l2penalty: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
