"""Graph Laplacian problem instances.

The bilinear form is

    (Au, v) = sum_e w_e (u_i - u_j)(v_i - v_j) + sum_{i in S_b} d_i u_i v_i,

so ``A`` is a weighted graph Laplacian plus an optional non-negative
diagonal of lower-order (boundary) terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import sparse as _sp

__all__ = [
    "Graph",
    "ProblemInstance",
    "laplacian_from_graph",
    "grid2d",
    "grid3d",
    "read_graph",
    "write_edge_list",
    "manufacture_rhs",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with optional edge weights and boundary terms.

    ``edges`` is an ``(m, 2)`` integer array with ``i < j`` in every row.
    """

    num_vertices: int
    edges: np.ndarray
    weights: np.ndarray | None = None
    boundary: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.num_vertices:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            key = e[:, 0] * self.num_vertices + e[:, 1]
            if np.unique(key).size != key.size:
                raise ValueError("duplicate edges are not allowed")
        object.__setattr__(self, "edges", e)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64).ravel()
            if w.shape[0] != e.shape[0]:
                raise ValueError("one weight per edge required")
            if np.any(w <= 0):
                raise ValueError("edge weights must be positive")
            object.__setattr__(self, "weights", w)
        for i, d in self.boundary.items():
            if not 0 <= i < self.num_vertices:
                raise ValueError(f"boundary vertex {i} out of range")
            if d <= 0:
                raise ValueError("boundary coefficients must be positive")

    @classmethod
    def from_matrix(cls, A) -> "Graph":
        """Sparsity-pattern graph of a symmetric matrix, weights ignored."""
        U = sp.triu(sp.csr_matrix(A), k=1).tocoo()
        mask = U.data != 0
        edges = np.column_stack([U.row[mask], U.col[mask]]).astype(np.int64)
        return cls(A.shape[0], edges)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form (sorted neighbor lists)."""
        n = self.num_vertices
        e = self.edges
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        adj.sort_indices()
        return adj

    def is_connected(self) -> bool:
        if self.num_vertices <= 1:
            return True
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1


@dataclass(frozen=True)
class ProblemInstance:
    A: sp.csr_matrix
    kernel: np.ndarray | None
    label: str
    graph: Graph | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]


def laplacian_from_graph(g: Graph, label: str = "graph") -> ProblemInstance:
    """Assemble the weighted graph Laplacian plus boundary diagonal of ``g``."""
    if not g.is_connected():
        raise ValueError("graph is disconnected")
    n = g.num_vertices
    e = g.edges
    w = np.ones(e.shape[0]) if g.weights is None else g.weights
    deg = np.zeros(n)
    np.add.at(deg, e[:, 0], w)
    np.add.at(deg, e[:, 1], w)
    for i, d in g.boundary.items():
        deg[i] += d
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)])
    vals = np.concatenate([-w, -w, deg])
    A = _sp.canonicalize(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))
    kernel = None if g.boundary else np.ones(n)
    return ProblemInstance(A, kernel, label, g)


def _grid_edges(shape) -> np.ndarray:
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    parts = []
    for axis in range(len(shape)):
        lo = [slice(None)] * len(shape)
        hi = [slice(None)] * len(shape)
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        parts.append(np.column_stack([idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()]))
    return np.concatenate(parts)


def grid2d(n: int) -> ProblemInstance:
    """Unit-weight Laplacian of the n x n 4-neighbor grid graph."""
    if n < 2:
        raise ValueError("grid2d needs n >= 2")
    g = Graph(n * n, _grid_edges((n, n)))
    return laplacian_from_graph(g, label=f"grid2d-{n}")


def grid3d(n: int) -> ProblemInstance:
    """Unit-weight Laplacian of the n x n x n 6-neighbor grid graph."""
    if n < 2:
        raise ValueError("grid3d needs n >= 2")
    g = Graph(n ** 3, _grid_edges((n, n, n)))
    return laplacian_from_graph(g, label=f"grid3d-{n}")


def _graph_from_matrix_entries(A: sp.csr_matrix) -> Graph:
    A = _sp.canonicalize(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not _sp.is_symmetric(A, tol=1e-14):
        raise ValueError("matrix must be symmetric")
    U = sp.triu(A, k=1).tocoo()
    if np.any(U.data > 0):
        raise ValueError("positive off-diagonal entry: not an M-matrix graph Laplacian")
    edges = np.column_stack([U.row, U.col]).astype(np.int64)
    weights = -U.data
    rowsum = np.asarray(A.sum(axis=1)).ravel()
    scale = max(1.0, float(np.abs(A.diagonal()).max())) if A.shape[0] else 1.0
    boundary = {}
    for i in np.flatnonzero(np.abs(rowsum) > 1e-12 * scale):
        if rowsum[i] < 0:
            raise ValueError(f"row {i} has negative row sum: not a graph Laplacian")
        boundary[int(i)] = float(rowsum[i])
    return Graph(A.shape[0], edges, weights, boundary)


def _read_edge_list(path: Path) -> Graph:
    rows, cols, ws = [], [], []
    weighted = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'i j [w]'")
            try:
                i, j = int(tok[0]), int(tok[1])
                w = float(tok[2]) if len(tok) == 3 else 1.0
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse {line!r}") from None
            weighted |= len(tok) == 3
            rows.append(min(i, j))
            cols.append(max(i, j))
            ws.append(w)
    if not rows:
        raise ValueError(f"{path}: no edges")
    n = max(cols) + 1
    edges = np.column_stack([rows, cols])
    return Graph(n, edges, np.array(ws) if weighted else None)


def read_graph(path, format: str | None = None) -> ProblemInstance:
    """Load a graph Laplacian problem from a Matrix Market or edge-list file.

    For matrix input, off-diagonal entries ``-w_ij`` become edge weights and
    positive row sums become boundary terms.
    """
    path = Path(path)
    if format is None:
        format = "matrix-market" if path.suffix.lower() in (".mtx", ".mm") else "edge-list"
    if format == "matrix-market":
        g = _graph_from_matrix_entries(_sp.read_matrix_market(path))
    elif format == "edge-list":
        g = _read_edge_list(path)
    else:
        raise ValueError(f"unknown graph format {format!r}")
    return laplacian_from_graph(g, label=path.stem)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {g.num_vertices} vertices, {g.num_edges} edges\n")
        for k, (i, j) in enumerate(g.edges):
            if g.weights is None:
                fh.write(f"{i} {j}\n")
            else:
                fh.write(f"{i} {j} {float(g.weights[k])!r}\n")


def manufacture_rhs(p: ProblemInstance, seed=0):
    """Seeded manufactured solution ``u_star`` and right-hand side ``f = A u_star``.

    ``u_star`` is uniform on [0, 1), projected orthogonal to the kernel when
    the problem is singular.
    """
    rng = np.random.default_rng(seed)
    u = rng.random(p.n)
    if p.kernel is not None:
        k = p.kernel
        u = u - (u @ k) / (k @ k) * k
    f = p.A @ u
    if p.kernel is not None:
        f = f - (f @ k) / (k @ k) * k
    return u, f
