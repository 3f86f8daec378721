"""End-to-end runs: build a problem, set up the hierarchy, solve, and report.

The defaults of :class:`RunConfig` give the standard protocol: W(1,1) cycle,
smoother degree 4 on ``[lambda1 / 10, lambda1]``, MIS on the graph of
``A^4``, two inner iterations, FCG restarted every 5 steps, and a 1e-8
relative A-norm error tolerance against a manufactured solution.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from collections import Counter
from dataclasses import asdict, dataclass, replace
from pathlib import Path


from . import aggregation as agg
from . import analysis
from . import multilevel as ml
from . import polynomial as poly
from .krylov import AnormErrorMonitor, SolveReport, fcg, pcg
from .problems import (Graph, ProblemInstance, grid2d, grid3d, manufacture_rhs, read_graph,
                       write_edge_list)

__all__ = [
    "RunConfig",
    "REPORT_KEYS",
    "TABLE_KEYS",
    "build_problem",
    "cycle_config",
    "run_solve",
    "solve_report_dict",
    "run_table",
    "run_analysis",
    "coarsen_only",
    "write_report",
]

log = logging.getLogger(__name__)

REPORT_KEYS = ("problem", "n", "nnz", "levels", "grid_complexity", "operator_complexity",
               "cycle", "iterations", "converged", "final_rel_a_norm_error",
               "setup_seconds", "solve_seconds", "seed")
TABLE_KEYS = ("problem", "size", "n", "cycle", "iterations", "converged",
              "grid_complexity", "operator_complexity", "setup_seconds", "solve_seconds",
              "error")


@dataclass(frozen=True)
class RunConfig:
    """One experiment. ``degree=None`` picks the smallest degree meeting ``rho``."""

    problem: str = "grid2d"
    n: int = 64
    path: str | None = None
    cycle: str = "namli"
    degree: int | None = 4
    mis_power: int = 4
    kappa: float = 10.0
    rho: float = 0.5
    inner: int = 2
    restart: int = 5
    tol: float = 1e-8
    max_iter: int = 200
    coarsest_size: int = 100
    seed: int = 0
    report_path: str | None = None
    report_format: str = "json"

    def __post_init__(self):
        if self.problem not in ("grid2d", "grid3d", "graph-file"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.problem == "graph-file" and not self.path:
            raise ValueError("problem graph-file needs a path")
        if self.report_format not in ("json", "csv"):
            raise ValueError(f"unknown report format {self.report_format!r}")
        if self.tol <= 0 or self.max_iter < 0 or self.restart < 1:
            raise ValueError("need tol > 0, max_iter >= 0 and restart >= 1")

    @property
    def resolved_degree(self) -> int:
        # the degree rule is applied to the operator scaled to lambda1 = 1
        if self.degree is not None:
            return self.degree
        return poly.min_degree(self.rho, self.kappa, 1.0)


def build_problem(cfg: RunConfig) -> ProblemInstance:
    if cfg.problem == "grid2d":
        return grid2d(cfg.n)
    if cfg.problem == "grid3d":
        return grid3d(cfg.n)
    return read_graph(cfg.path)


def cycle_config(cfg: RunConfig) -> ml.CycleConfig:
    return ml.CycleConfig(cycle=cfg.cycle, inner=cfg.inner, degree=cfg.resolved_degree,
                          mis_power=cfg.mis_power, kappa=cfg.kappa,
                          coarsest_size=cfg.coarsest_size, seed=cfg.seed)


def run_solve(cfg: RunConfig, problem: ProblemInstance | None = None):
    """Full pipeline; returns ``(report, hierarchy)``.

    AMLI runs PCG (the preconditioner is linear), N-AMLI runs FCG restarted
    every ``cfg.restart`` iterations.
    """
    p = problem if problem is not None else build_problem(cfg)
    u_star, f = manufacture_rhs(p, seed=cfg.seed)
    h = ml.setup(p, cycle_config(cfg))
    mon = AnormErrorMonitor(p.A, u_star)
    B = h.preconditioner()
    t0 = time.perf_counter()
    if cfg.cycle == "amli":
        _, rep = pcg(p.A, f, B, tol=cfg.tol, max_iter=cfg.max_iter, monitor=mon, kernel=p.kernel)
    else:
        _, rep = fcg(p.A, f, B, tol=cfg.tol, max_iter=cfg.max_iter, restart=cfg.restart,
                     monitor=mon, kernel=p.kernel)
    rep.solve_seconds = time.perf_counter() - t0
    rep.setup_seconds = h.setup_seconds
    rep.complexities = h.complexities()
    rep.config = asdict(cfg)
    return rep, h


def solve_report_dict(cfg: RunConfig, p: ProblemInstance, rep: SolveReport,
                      h: ml.Hierarchy) -> dict:
    """Report with the fixed key set :data:`REPORT_KEYS`."""
    grid, op = rep.complexities
    return {
        "problem": p.label,
        "n": p.n,
        "nnz": int(p.A.nnz),
        "levels": [{"n": lev.n, "nnz": int(lev.A.nnz), "lambda1": lev.lambda1}
                   for lev in h.levels],
        "grid_complexity": grid,
        "operator_complexity": op,
        "cycle": cfg.cycle,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "final_rel_a_norm_error": rep.final_rel_a_norm_error,
        "setup_seconds": rep.setup_seconds,
        "solve_seconds": rep.solve_seconds,
        "seed": cfg.seed,
    }


def _csv_text(rows, keys) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        out = dict(row)
        if isinstance(out.get("levels"), list):
            out["levels"] = ";".join(str(lev["n"]) for lev in out["levels"])
        w.writerow(out)
    return buf.getvalue()


def write_report(data, path, fmt: str = "json", keys=REPORT_KEYS) -> str:
    """Serialize a report (dict) or table (list of dicts); write it if ``path`` is given."""
    if fmt == "json":
        text = json.dumps(data, indent=2) + "\n"
    else:
        text = _csv_text(data if isinstance(data, list) else [data], keys)
    if path is not None:
        Path(path).write_text(text)
    return text


def run_table(sizes, problems=("grid2d",), cycles=("amli", "namli"),
              cfg: RunConfig = RunConfig(), growth_warn: int = 5) -> list[dict]:
    """Cross product of problems, sizes and cycles, one row per cell.

    A failing cell records its error in the row and the run continues. A
    warning is logged when the iteration count of a cycle grows by more
    than ``growth_warn`` between consecutive sizes of a problem.
    """
    rows = []
    for prob in problems:
        last = {}
        for size in sizes:
            for cyc in cycles:
                row = dict.fromkeys(TABLE_KEYS)
                row.update(problem=prob, size=size, cycle=cyc)
                try:
                    c = replace(cfg, problem=prob, n=size, cycle=cyc)
                    p = build_problem(c)
                    rep, h = run_solve(c, p)
                    grid, op = rep.complexities
                    row.update(problem=p.label, n=p.n, iterations=rep.iterations,
                               converged=rep.converged, grid_complexity=grid,
                               operator_complexity=op, setup_seconds=rep.setup_seconds,
                               solve_seconds=rep.solve_seconds)
                    if cyc in last and rep.iterations - last[cyc] > growth_warn:
                        log.warning("%s %s: iterations grew from %d to %d at size %s",
                                    prob, cyc, last[cyc], rep.iterations, size)
                    last[cyc] = rep.iterations
                except Exception as exc:  # recorded per cell, the table goes on
                    row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
    return rows


def run_analysis(cfg: RunConfig) -> analysis.ConstantsReport:
    """Measured constants for ``cfg``'s problem (dense, small instances only)."""
    p = build_problem(cfg)
    return analysis.constants_report(p, mis_power=cfg.mis_power, degree=cfg.resolved_degree,
                                     kappa=cfg.kappa, seed=cfg.seed,
                                     order=cycle_config(cfg).mis_order)


def coarsen_only(cfg: RunConfig, partition_path=None, coarse_graph_path=None) -> dict:
    """Aggregate the fine graph once and return partition metrics.

    The partition (one aggregate id per vertex) and the coarse graph (edge
    list) are written when paths are given.
    """
    p = build_problem(cfg)
    g = p.graph if p.graph is not None else Graph.from_matrix(p.A)
    part = agg.aggregate(g, cfg.mis_power, seed=[cfg.seed, 0],
                         order=cycle_config(cfg).mis_order)
    agg.validate_partition(part, g, cfg.mis_power)
    if partition_path is not None:
        agg.write_partition(partition_path, part)
    gc = agg.coarse_graph(g, part)
    if coarse_graph_path is not None:
        write_edge_list(coarse_graph_path, gc)
    diam = agg.aggregate_diameters(g, part)
    hist = Counter(int(s) for s in part.sizes)
    return {
        "problem": p.label,
        "n": p.n,
        "num_aggregates": part.num_aggregates,
        "coarsening_factor": part.coarsening_factor,
        "mis_power": cfg.mis_power,
        "coarse_edges": gc.num_edges,
        "size_histogram": {str(k): hist[k] for k in sorted(hist)},
        "max_diameter": int(diam.max()) if diam.size else 0,
        "mean_diameter": float(diam.mean()) if diam.size else 0.0,
        "seed": cfg.seed,
    }
