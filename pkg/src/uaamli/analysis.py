"""Measured two-level constants for plain aggregation with a polynomial smoother.

For a partition into aggregates ``V_l`` with local Laplacians ``A_l`` the
weak approximation constant is ``c_p = max_l 1 / lambda_l``, where
``lambda_l`` is the smallest positive eigenvalue of ``A_l``. The stability
constant ``c_0 = |Q|_A^2`` of the piecewise-constant projection is measured
by a dense generalized eigensolve, and the two-level bound

    K_TG = 8 + 8 c_1 (c_nz c_p c_s + 1),   c_1 = 2 c_0 + 3,   c_s = ln(m)^2 / m^2

is compared with the condition number of the densely assembled two-level
preconditioner. Everything here is dense and meant for small instances.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from . import polynomial as poly
from .aggregation import Partition, aggregate, aggregate_diameters, interpolation, project_Q
from .problems import Graph, ProblemInstance, laplacian_from_graph
from .sparse import max_row_nnz

__all__ = [
    "DenseCapError",
    "ConstantsReport",
    "local_poincare",
    "poincare_constant",
    "check_wap",
    "measure_Q_stability",
    "smoothing_constant",
    "ktg_bound",
    "two_level_matrix",
    "measure_two_level",
    "cheeger_diagnostic",
    "constants_report",
]

DENSE_CAP = 2000


class DenseCapError(ValueError):
    """Instance too large for the dense eigensolvers used here."""


def _check_cap(n: int, cap: int, what: str):
    if n > cap:
        raise DenseCapError(f"{what} has {n} unknowns, above the dense cap of {cap}")


def _local_laplacian(g: Graph, members: np.ndarray) -> np.ndarray:
    local = np.full(g.num_vertices, -1, dtype=np.int64)
    local[members] = np.arange(members.size)
    e = local[g.edges]
    inside = (e[:, 0] >= 0) & (e[:, 1] >= 0)
    e = e[inside]
    w = np.ones(e.shape[0]) if g.weights is None else g.weights[inside]
    L = np.zeros((members.size, members.size))
    np.add.at(L, (e[:, 0], e[:, 1]), -w)
    np.add.at(L, (e[:, 1], e[:, 0]), -w)
    L[np.diag_indices(members.size)] = -L.sum(axis=1)
    return L


def local_poincare(p: Partition, g: Graph, cap: int = DENSE_CAP) -> np.ndarray:
    """Smallest positive eigenvalue ``lambda_l`` of each aggregate's Laplacian.

    The local Laplacian keeps the edges with both endpoints in the aggregate
    (and their weights, which are one for the grid problems). Singletons get
    ``+inf``, so that ``1 / lambda_l = 0``.

    Raises
    ------
    ValueError
        If an aggregate's induced subgraph is disconnected.
    DenseCapError
        If an aggregate has more than ``cap`` vertices.
    """
    lam = np.full(p.num_aggregates, np.inf)
    for l, members in enumerate(p.groups()):
        if members.size == 1:
            continue
        _check_cap(members.size, cap, f"aggregate {l}")
        ev = la.eigvalsh(_local_laplacian(g, members))
        tol = 1e-10 * max(1.0, ev[-1])
        if ev[1] <= tol:
            raise ValueError(f"aggregate {l} is not connected")
        lam[l] = ev[1]
    return lam


def poincare_constant(lam) -> float:
    """``c_p = max_l 1 / lambda_l`` (0 when every aggregate is a singleton)."""
    lam = np.asarray(lam, dtype=float)
    return float(np.max(1.0 / lam)) if lam.size else 0.0


def check_wap(p: Partition, g: Graph, v, c_p: float | None = None, A=None):
    """Both sides of the weak approximation property ``|v - Qv|^2 <= c_p (Av, v)``.

    ``A`` defaults to the Laplacian of ``g`` and ``c_p`` to the measured
    Poincare constant of ``p``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != g.num_vertices or p.num_vertices != g.num_vertices:
        raise ValueError("dimension mismatch between v, partition and graph")
    if c_p is None:
        c_p = poincare_constant(local_poincare(p, g))
    if A is None:
        A = laplacian_from_graph(g).A if g.is_connected() else _graph_laplacian(g)
    d = v - project_Q(p, v)
    return float(d @ d), float(c_p * (v @ (A @ v)))


def _graph_laplacian(g: Graph) -> sp.csr_matrix:
    n = g.num_vertices
    L = _local_laplacian(g, np.arange(n))
    for i, d in g.boundary.items():
        L[i, i] += d
    return sp.csr_matrix(L)


def _kernel_complement(n: int, kernel) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``kernel`` (or identity)."""
    if kernel is None:
        return np.eye(n)
    k = np.asarray(kernel, dtype=float).reshape(-1, 1)
    Qf, _ = la.qr(k, mode="full")
    return Qf[:, 1:]


def _auto_kernel(Ad: np.ndarray):
    """Constants if every row sum vanishes (a pure graph Laplacian), else None."""
    scale = np.abs(Ad).max() if Ad.size else 1.0
    return np.ones(Ad.shape[0]) if np.allclose(Ad.sum(axis=1), 0, atol=1e-12 * scale) else None


def _dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def measure_Q_stability(p: Partition, A, kernel="auto", cap: int = DENSE_CAP) -> float:
    """Measured ``c_0 = |Q|_A^2 = sup |Qv|_A^2 / |v|_A^2`` over ``(v, kernel) = 0``.

    ``kernel="auto"`` uses the constants when ``A`` has zero row sums.
    """
    n = A.shape[0]
    _check_cap(n, cap, "operator")
    Ad = _dense(A)
    if isinstance(kernel, str):
        kernel = _auto_kernel(Ad)
    Z = _kernel_complement(n, kernel)
    P = interpolation(p).toarray()
    Qm = P @ (P.T / p.sizes[:, None])
    QZ = Qm @ Z
    lhs = QZ.T @ Ad @ QZ
    rhs = Z.T @ Ad @ Z
    mu = la.eigh(0.5 * (lhs + lhs.T), 0.5 * (rhs + rhs.T), eigvals_only=True)
    return max(float(mu[-1]), 0.0)


def smoothing_constant(m: int) -> float:
    """``c_s = ln(m)^2 / m^2``."""
    return math.log(m) ** 2 / m ** 2


def ktg_bound(c_0: float, c_p: float, c_nz: float, m: int) -> float:
    """Two-level bound ``8 + 8 (2 c_0 + 3) (c_nz c_p c_s + 1)``."""
    if m < 2:
        raise ValueError("ktg_bound needs m >= 2")
    if min(c_0, c_p, c_nz) < 0:
        raise ValueError("constants must be non-negative")
    return 8.0 + 8.0 * (2.0 * c_0 + 3.0) * (c_nz * c_p * smoothing_constant(m) + 1.0)


def two_level_matrix(A, partition: Partition, smoother) -> np.ndarray:
    """Dense symmetric two-level preconditioner.

    ``B = Rbar + (I - RA) P A_H^+ P^T (I - AR)`` with ``R = q_m(A)`` and
    ``Rbar = R + R - R A R``. ``smoother`` is a :class:`PolySmoother` or,
    for testing, a dense matrix ``R``.
    """
    Ad = _dense(A)
    n = Ad.shape[0]
    if isinstance(smoother, poly.PolySmoother):
        w, V = la.eigh(Ad)
        R = (V * smoother(np.maximum(w, 0.0))) @ V.T
    else:
        R = _dense(smoother)
    R = 0.5 * (R + R.T)
    P = interpolation(partition).toarray()
    AH = P.T @ Ad @ P
    I = np.eye(n)
    E = (I - R @ Ad) @ P
    B = 2 * R - R @ Ad @ R + E @ la.pinvh(AH) @ E.T
    return 0.5 * (B + B.T)


def measure_two_level(A, partition: Partition, smoother, kernel="auto",
                      cap: int = DENSE_CAP, check_tol: float = 1e-8):
    """Measured condition number of the two-level preconditioner.

    Returns ``(kappa_TL, eigenvalues)`` with the eigenvalues of ``BA`` on the
    complement of the kernel, ascending. Raises ``AssertionError`` if the
    largest exceeds ``1 + check_tol`` or the smallest is not positive.
    """
    n = A.shape[0]
    _check_cap(n, cap, "operator")
    Ad = _dense(A)
    if isinstance(kernel, str):
        kernel = _auto_kernel(Ad)
    B = two_level_matrix(Ad, partition, smoother)
    Z = _kernel_complement(n, kernel)
    AZ = Ad @ Z
    lhs = AZ.T @ B @ AZ
    rhs = Z.T @ AZ
    mu = la.eigh(0.5 * (lhs + lhs.T), 0.5 * (rhs + rhs.T), eigvals_only=True)
    if mu[-1] > 1 + check_tol:
        raise AssertionError(f"lambda_max(BA) = {mu[-1]!r} exceeds 1 + {check_tol}")
    if mu[0] <= 0:
        raise AssertionError(f"lambda_min(BA) = {mu[0]!r} is not positive")
    return float(mu[-1] / mu[0]), mu


def cheeger_diagnostic(p: Partition, g: Graph) -> np.ndarray:
    """``|V_l| * diam(G_l)`` per aggregate, a shape indicator that tracks ``1 / lambda_l``."""
    return p.sizes * aggregate_diameters(g, p)


@dataclass
class ConstantsReport:
    lambda_l: list = field(default_factory=list)
    c_p: float = 0.0
    c_0: float = 0.0
    c_1: float = 3.0
    c_s: float = 0.0
    c_nz: float = 0.0
    K_TG_bound: float = 0.0
    measured_kappa_TL: float = float("nan")
    cheeger: list = field(default_factory=list)
    degree: int = 0
    mis_power: int = 0
    kappa: float = 0.0
    n: int = 0
    num_aggregates: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        # JSON has no infinity; singletons are reported as null
        d["lambda_l"] = [None if math.isinf(x) else x for x in self.lambda_l]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def constants_report(problem: ProblemInstance, mis_power: int = 2, degree: int = 4,
                     kappa: float = 10.0, seed=0, partition: Partition | None = None,
                     order: str = "greedy", cap: int = DENSE_CAP) -> ConstantsReport:
    """All measured constants and the two-level condition number for one instance."""
    _check_cap(problem.n, cap, problem.label)
    g = problem.graph if problem.graph is not None else Graph.from_matrix(problem.A)
    p = partition if partition is not None else aggregate(g, mis_power, seed=seed, order=order)
    lam = local_poincare(p, g, cap)
    c_p = poincare_constant(lam)
    c_0 = measure_Q_stability(p, problem.A, problem.kernel, cap)
    c_nz = float(max_row_nnz(problem.A))
    lam1 = float(np.abs(problem.A).sum(axis=1).max())
    s = poly.build(lam1 / kappa, lam1, degree)
    kappa_tl, _ = measure_two_level(problem.A, p, s, problem.kernel, cap)
    return ConstantsReport(
        lambda_l=[float(x) for x in lam],
        c_p=c_p,
        c_0=c_0,
        c_1=2 * c_0 + 3,
        c_s=smoothing_constant(degree),
        c_nz=c_nz,
        K_TG_bound=ktg_bound(c_0, c_p, c_nz, degree),
        measured_kappa_TL=kappa_tl,
        cheeger=[int(x) for x in cheeger_diagnostic(p, g)],
        degree=degree,
        mis_power=mis_power,
        kappa=kappa,
        n=problem.n,
        num_aggregates=p.num_aggregates,
    )
