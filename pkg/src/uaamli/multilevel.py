"""Multilevel hierarchy and AMLI / nonlinear AMLI (k-cycle) preconditioners.

Setup repeatedly aggregates the sparsity graph of the current operator and
forms the Galerkin product until the operator has fewer than
``coarsest_size`` rows. The finest level uses the ``frontier`` MIS order
(which sets the grid and operator complexity), coarser levels the seeded
greedy order by default. Each non-coarsest level carries the polynomial
smoother ``q_m`` on ``[lambda1 / kappa, lambda1]`` with
``lambda1 = ||A_j||_inf``.

The level-``j`` preconditioner ``B_j`` is a symmetric cycle: ``pre_smooth``
smoothing steps from a zero guess, a coarse correction, and
``post_smooth`` smoothing steps. The coarse correction is either

* ``amli``: ``s(B_{j+1} A_{j+1}) B_{j+1}`` with ``s`` the degree ``inner - 1``
  best approximation to ``1/t`` on ``[amli_theta0, 1]`` (a fixed linear
  operator), or
* ``namli``: ``inner`` steps of flexible CG on the coarse system
  preconditioned by ``B_{j+1}`` (a nonlinear operator).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import chebyshev as C

from . import polynomial as poly
from .aggregation import Partition, aggregate, galerkin, interpolation
from .krylov import fcg
from .problems import Graph, ProblemInstance
from .sparse import DenseSolver, inf_norm

__all__ = [
    "CycleConfig",
    "Level",
    "Hierarchy",
    "CoarseningStagnation",
    "setup",
    "two_level_apply",
    "precond_apply",
    "amli_coarse_correction",
    "namli_coarse_correction",
    "complexities",
]


class CoarseningStagnation(RuntimeError):
    pass


@dataclass(frozen=True)
class CycleConfig:
    """Cycle and setup parameters; defaults give the W(1,1), m=4, A^4 protocol.

    ``amli_theta0`` must keep the degree ``inner - 1`` best approximation to
    ``1/t`` on ``[amli_theta0, 1]`` positive; for ``inner = 2`` that means
    ``amli_theta0 > 3 - 2 sqrt(2) ~ 0.172``.
    """

    cycle: str = "namli"
    pre_smooth: int = 1
    post_smooth: int = 1
    inner: int = 2
    degree: int = 4
    mis_power: int = 4
    mis_order: str = "frontier"
    coarse_mis_order: str = "greedy"
    kappa: float = 10.0
    amli_theta0: float = 0.25
    coarsest_size: int = 100
    seed: int | None = 0

    def __post_init__(self):
        if self.cycle not in ("amli", "namli"):
            raise ValueError(f"unknown cycle {self.cycle!r}")
        if self.inner < 1 or self.degree < 1 or self.mis_power < 1:
            raise ValueError("inner, degree and mis_power must be >= 1")
        if self.pre_smooth < 0 or self.post_smooth < 0:
            raise ValueError("smoothing step counts must be non-negative")
        if self.kappa <= 1:
            raise ValueError("kappa must exceed 1")
        if not 0 < self.amli_theta0 < 1:
            raise ValueError("amli_theta0 must lie in (0, 1)")
        for order in (self.mis_order, self.coarse_mis_order):
            if order not in ("greedy", "frontier"):
                raise ValueError(f"unknown MIS order {order!r}")
        if self.coarsest_size < 2:
            raise ValueError("coarsest_size must be >= 2")


@dataclass(frozen=True)
class Level:
    A: sp.csr_matrix
    lambda1: float
    partition: Partition | None = None
    P: sp.csr_matrix | None = None
    smoother: poly.PolySmoother | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def restrict(self, r):
        """``P^T r`` as aggregate sums."""
        p = self.partition
        return np.bincount(p.aggregate_of, weights=r, minlength=p.num_aggregates)

    def prolong(self, e):
        """``P e`` as a gather."""
        return e[self.partition.aggregate_of]


@dataclass(frozen=True)
class Hierarchy:
    levels: list
    coarse_solver: DenseSolver
    kernel: np.ndarray | None
    config: CycleConfig
    amli_poly: np.ndarray | None = None
    setup_seconds: float = 0.0

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def complexities(self):
        return complexities(self)

    def summary(self) -> dict:
        """JSON-ready per-level description."""
        grid, op = complexities(self)
        out = []
        for lev in self.levels:
            row = {"n": lev.n, "nnz": int(lev.A.nnz), "lambda1": lev.lambda1}
            if lev.partition is not None:
                row["n_H"] = lev.partition.num_aggregates
                row["coarsening_factor"] = lev.partition.coarsening_factor
            out.append(row)
        return {"levels": out, "grid_complexity": grid, "operator_complexity": op,
                "config": asdict(self.config)}

    def fingerprint(self) -> str:
        """SHA-256 over every level array; equal for bitwise-identical hierarchies."""
        h = hashlib.sha256()
        for lev in self.levels:
            for arr in (lev.A.indptr, lev.A.indices, lev.A.data):
                h.update(np.ascontiguousarray(arr).tobytes())
            if lev.partition is not None:
                h.update(lev.partition.aggregate_of.tobytes())
                h.update(lev.smoother.cheb_coeffs.tobytes())
        h.update(json.dumps(asdict(self.config), sort_keys=True).encode())
        return h.hexdigest()

    def level_kernel(self, level: int):
        """Constant null vector of ``A_level`` for kernel-bearing problems, else None."""
        return None if self.kernel is None else np.ones(self.levels[level].n)

    def preconditioner(self, level: int = 0, counts=None):
        """Callable ``r -> B_level r``."""
        return lambda r: precond_apply(self, r, level, counts)


def _amli_coefficients(cfg: CycleConfig) -> np.ndarray | None:
    if cfg.cycle != "amli":
        return None
    if cfg.inner == 1:
        return np.array([1.0])
    s = poly.build(cfg.amli_theta0, 1.0, cfg.inner - 1)
    return s.cheb_coeffs


def setup(problem: ProblemInstance, cfg: CycleConfig = CycleConfig()) -> Hierarchy:
    """Build the aggregation hierarchy, smoothers and coarsest factorization."""
    t0 = time.perf_counter()
    A = problem.A
    levels = []
    j = 0
    while A.shape[0] >= cfg.coarsest_size:
        g = Graph.from_matrix(A)
        seed = None if cfg.seed is None else [cfg.seed, j]
        order = cfg.mis_order if j == 0 else cfg.coarse_mis_order
        part = aggregate(g, cfg.mis_power, seed=seed, order=order)
        if part.num_aggregates == A.shape[0]:
            raise CoarseningStagnation(f"no coarsening on level {j} (n = {A.shape[0]})")
        lam1 = inf_norm(A)
        try:
            smoother = poly.build(lam1 / cfg.kappa, lam1, cfg.degree)
        except ValueError as exc:
            raise ValueError(f"level {j} smoother: {exc}; use a larger degree") from None
        levels.append(Level(A, lam1, part, interpolation(part), smoother))
        A = galerkin(A, part)
        j += 1
    kernel = None if problem.kernel is None else np.ones(A.shape[0])
    coarse = DenseSolver(A, kernel=kernel)
    levels.append(Level(A, inf_norm(A) if A.shape[0] else 0.0))
    return Hierarchy(levels, coarse, problem.kernel, cfg, _amli_coefficients(cfg),
                     time.perf_counter() - t0)


def _smooth(lev: Level, f, x):
    if x is None:
        return poly.apply(lev.smoother, lev.A, f)
    return x + poly.apply(lev.smoother, lev.A, f - lev.A @ x)


def two_level_apply(A, partition: Partition, smoother, coarse_solver, w, f) -> np.ndarray:
    """Coarse correction followed by one post-smoothing step.

    ``y = w + P A_H^+ P^T (f - A w)`` then ``v = y + q_m(A)(f - A y)``;
    ``coarse_solver`` realizes the action of ``A_H^+``.
    """
    P = interpolation(partition)
    y = w + P @ coarse_solver(P.T @ (f - A @ w))
    return y + poly.apply(smoother, A, f - A @ y)


def precond_apply(h: Hierarchy, r, level: int = 0, counts=None) -> np.ndarray:
    """Apply the level-``level`` cycle ``B_level`` to ``r``.

    ``counts``, when a list, receives one increment per visit of each level.
    """
    r = np.asarray(r, dtype=np.float64)
    if counts is not None:
        while len(counts) <= level:
            counts.append(0)
        counts[level] += 1
    if level == h.num_levels - 1:
        return h.coarse_solver.solve(r)
    lev = h.levels[level]
    cfg = h.config
    x = None
    for _ in range(cfg.pre_smooth):
        x = _smooth(lev, r, x)
    res = r if x is None else r - lev.A @ x
    rc = lev.restrict(res)
    if cfg.cycle == "amli":
        ec = amli_coarse_correction(h, level, rc, counts)
    else:
        ec = namli_coarse_correction(h, level, rc, counts)
    x = lev.prolong(ec) if x is None else x + lev.prolong(ec)
    for _ in range(cfg.post_smooth):
        x = _smooth(lev, r, x)
    return x


def amli_coarse_correction(h: Hierarchy, level: int, rhs, counts=None) -> np.ndarray:
    """``s(B A) B rhs`` on level ``level + 1`` by Clenshaw in ``t = B A``.

    Uses ``inner`` applications of ``B_{level+1}`` and ``inner - 1`` products
    with ``A_{level+1}``.
    """
    c = h.amli_poly
    if c is None:
        c = _amli_coefficients(CycleConfig(**{**asdict(h.config), "cycle": "amli"}))
    nxt = level + 1
    A = h.levels[nxt].A
    B = lambda v: precond_apply(h, v, nxt, counts)
    y = B(rhs)
    deg = c.shape[0] - 1
    if deg == 0:
        return c[0] * y
    theta0 = h.config.amli_theta0
    alpha, beta = 2.0 / (1 - theta0), (1 + theta0) / (1 - theta0)
    T = lambda v: alpha * B(A @ v) - beta * v
    b1, b2 = c[deg] * y, np.zeros_like(y)
    for k in range(deg - 1, 0, -1):
        b1, b2 = c[k] * y + 2.0 * T(b1) - b2, b1
    return c[0] * y + T(b1) - b2


def namli_coarse_correction(h: Hierarchy, level: int, rhs, counts=None) -> np.ndarray:
    """``inner`` flexible-CG steps on level ``level + 1`` from a zero guess."""
    nxt = level + 1
    A = h.levels[nxt].A
    x, _ = fcg(A, rhs, h.preconditioner(nxt, counts), tol=None,
               max_iter=h.config.inner, restart=h.config.inner + 1,
               kernel=h.level_kernel(nxt))
    return x


def complexities(h: Hierarchy):
    """Grid and operator complexity ``(sum n_j / n_0, sum nnz_j / nnz_0)``."""
    n = np.array([lev.n for lev in h.levels], dtype=float)
    nnz = np.array([lev.A.nnz for lev in h.levels], dtype=float)
    return float(n.sum() / n[0]), float(nnz.sum() / nnz[0]) if nnz[0] else 1.0
