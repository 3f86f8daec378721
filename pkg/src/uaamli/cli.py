"""Command-line front end: ``uaamli {solve,table,analyze,coarsen} [options]``.

Exit status is 0 when a solve converged (or an analysis / coarsening run
completed), 1 when a solve did not converge, and 2 on any error. Errors are
reported as one JSON line on stderr, ``{"error": <type>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments as ex
from . import polynomial as poly

__all__ = ["main", "build_parser"]


def _add_common(p: argparse.ArgumentParser, table: bool = False):
    d = ex.RunConfig()
    if not table:
        p.add_argument("--problem", choices=["grid2d", "grid3d", "graph-file"], default=d.problem)
        p.add_argument("--n", type=int, default=d.n, help="grid points per side")
        p.add_argument("--cycle", choices=["amli", "namli"], default=d.cycle)
    p.add_argument("--path", default=None, help="Matrix Market or edge-list file for graph-file")
    p.add_argument("--degree", type=int, default=d.degree,
                   help="smoother degree m; 0 picks the smallest m meeting --rho")
    p.add_argument("--mis-power", type=int, default=d.mis_power)
    p.add_argument("--kappa", type=float, default=d.kappa)
    p.add_argument("--rho", type=float, default=d.rho)
    p.add_argument("--inner", type=int, default=d.inner)
    p.add_argument("--restart", type=int, default=d.restart)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--coarsest-size", type=int, default=d.coarsest_size)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--report", default=None, help="output file (stdout when omitted)")
    p.add_argument("--report-format", choices=["json", "csv"], default=d.report_format)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uaamli", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)
    sv = sub.add_parser("solve", help="run one preconditioned solve")
    _add_common(sv)
    sv.add_argument("--smoother-diagnostics", default=None, metavar="CSV",
                    help="write the finest-level smoother coefficients and alternation points")
    t = sub.add_parser("table", help="iteration table over sizes and cycles")
    t.add_argument("--problems", nargs="+", default=["grid2d"],
                   choices=["grid2d", "grid3d", "graph-file"])
    t.add_argument("--sizes", nargs="+", type=int, required=True)
    t.add_argument("--cycles", nargs="+", default=["amli", "namli"], choices=["amli", "namli"])
    _add_common(t, table=True)
    a = sub.add_parser("analyze", help="measured two-level constants (dense)")
    _add_common(a)
    a.set_defaults(n=8, mis_power=2)
    c = sub.add_parser("coarsen", help="aggregate once and report partition metrics")
    _add_common(c)
    c.add_argument("--partition", default=None, help="write the partition here")
    c.add_argument("--coarse-graph", default=None, help="write the coarse edge list here")
    return ap


def _config(args) -> ex.RunConfig:
    return ex.RunConfig(
        problem=getattr(args, "problem", "grid2d"), n=getattr(args, "n", 64), path=args.path,
        cycle=getattr(args, "cycle", "namli"), degree=args.degree or None,
        mis_power=args.mis_power, kappa=args.kappa, rho=args.rho, inner=args.inner,
        restart=args.restart, tol=args.tol, max_iter=args.max_iter,
        coarsest_size=args.coarsest_size, seed=args.seed, report_path=args.report,
        report_format=args.report_format)


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)


def run(args) -> int:
    cfg = _config(args)
    if args.verb == "solve":
        p = ex.build_problem(cfg)
        rep, h = ex.run_solve(cfg, p)
        if args.smoother_diagnostics and h.levels[0].smoother is not None:
            poly.write_diagnostics(args.smoother_diagnostics, h.levels[0].smoother)
        data = ex.solve_report_dict(cfg, p, rep, h)
        _emit(ex.write_report(data, cfg.report_path, cfg.report_format), cfg.report_path)
        return 0 if rep.converged else 1
    if args.verb == "table":
        rows = ex.run_table(args.sizes, args.problems, args.cycles, cfg)
        _emit(ex.write_report(rows, cfg.report_path, cfg.report_format, ex.TABLE_KEYS),
              cfg.report_path)
        return 0
    if args.verb == "analyze":
        r = ex.run_analysis(cfg)
        d = r.to_dict()
        keys = [k for k in d if k not in ("lambda_l", "cheeger")]
        if cfg.report_format == "csv":
            d = {k: d[k] for k in keys}
        _emit(ex.write_report(d, cfg.report_path, cfg.report_format, keys), cfg.report_path)
        return 0
    m = ex.coarsen_only(cfg, args.partition, args.coarse_graph)
    if cfg.report_format == "csv":
        m = {k: v for k, v in m.items() if k != "size_histogram"}
    _emit(ex.write_report(m, cfg.report_path, cfg.report_format, list(m)), cfg.report_path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except Exception as exc:
        msg = str(exc).splitlines()[0] if str(exc) else ""
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": msg}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
