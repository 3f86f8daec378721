"""Unsmoothed aggregation: graph partitioning and piecewise-constant coarse spaces.

Coarse vertices are a maximal independent set of the graph of ``A^k``
(vertices pairwise more than ``k`` hops apart). Each selected vertex then
grows an aggregate by breadth-first rounds. The distance-k graph itself is
never formed; independence is tested with radius-k BFS balls.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import sparse as _sp
from .problems import Graph

__all__ = [
    "Partition",
    "mis_distance_k",
    "build_aggregates",
    "aggregate",
    "interpolation",
    "project_Q",
    "galerkin",
    "coarse_graph",
    "validate_partition",
    "bfs_distances",
    "aggregate_diameters",
    "write_partition",
    "read_partition",
]


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of ``0..n-1`` by connected aggregates.

    Attributes
    ----------
    aggregate_of : ndarray of int
        Aggregate id of every vertex.
    roots : ndarray of int
        Seed vertex of each aggregate; aggregate ids follow increasing root id.
    sizes : ndarray of int
        Cardinality of each aggregate.
    """

    aggregate_of: np.ndarray
    roots: np.ndarray
    sizes: np.ndarray

    @classmethod
    def from_labels(cls, labels, roots=None) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        nagg = int(labels.max()) + 1 if labels.size else 0
        sizes = np.bincount(labels, minlength=nagg)
        if np.any(sizes == 0):
            raise ValueError("aggregate ids must be contiguous and every aggregate nonempty")
        if roots is None:
            # first vertex of each aggregate
            order = np.argsort(labels, kind="stable")
            starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
            roots = order[starts]
        return cls(labels, np.asarray(roots, dtype=np.int64), sizes)

    @property
    def num_vertices(self) -> int:
        return int(self.aggregate_of.shape[0])

    @property
    def num_aggregates(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def coarsening_factor(self) -> float:
        return self.num_vertices / self.num_aggregates

    def members(self, l: int) -> np.ndarray:
        return np.flatnonzero(self.aggregate_of == l)

    def groups(self) -> list[np.ndarray]:
        """Vertex lists of all aggregates, in aggregate-id order."""
        order = np.argsort(self.aggregate_of, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])


def _adjacency_lists(g: Graph):
    adj = g.adjacency()
    return adj.indptr, adj.indices


def mis_distance_k(g: Graph, k: int, seed=0, order: str = "greedy") -> np.ndarray:
    """Maximal independent set of the distance-k graph of ``g``.

    Selected vertices are pairwise more than ``k`` hops apart and every
    vertex lies within ``k`` hops of one of them. Two visiting orders:

    ``"greedy"``
        Visit vertices in a seeded random permutation (natural order when
        ``seed is None``) and select every vertex with no selected vertex
        within ``k`` hops.
    ``"frontier"``
        Grow the set outward from a seed vertex: the next vertex selected is
        one at the largest available distance from the current set, capped
        at ``2k - 1`` (first-reached order among equals). Placing new roots
        nearly ``2k`` hops from existing ones gives sparser sets, and so
        fewer aggregates, than random greedy.

    Returns the selected vertices sorted.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = g.num_vertices
    perm = np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)
    indptr, indices = _adjacency_lists(g)
    indptr = indptr.tolist()
    indices = indices.tolist()
    if order == "greedy":
        return _mis_greedy(n, indptr, indices, perm.tolist(), k)
    if order == "frontier":
        return _mis_frontier(n, indptr, indices, perm.tolist(), k)
    raise ValueError(f"unknown MIS order {order!r}")


def _mis_greedy(n, indptr, indices, perm, k):
    covered = bytearray(n)
    stamp = [-1] * n
    selected = []
    for v in perm:
        if covered[v]:
            continue
        selected.append(v)
        covered[v] = 1
        stamp[v] = v
        front = [v]
        for _ in range(k):
            nxt = []
            for u in front:
                for w in indices[indptr[u]:indptr[u + 1]]:
                    if stamp[w] != v:
                        stamp[w] = v
                        covered[w] = 1
                        nxt.append(w)
            if not nxt:
                break
            front = nxt
    return np.array(sorted(selected), dtype=np.int64)


def _mis_frontier(n, indptr, indices, perm, k):
    cap = 2 * k - 1
    far = cap + 1  # "not within cap hops of any selected vertex"
    dist = [far] * n
    stamp = [-1] * n
    buckets = [deque() for _ in range(cap + 1)]
    selected = []
    pos = 0
    while True:
        v = -1
        for d in range(cap, k, -1):
            b = buckets[d]
            while b:
                u = b.popleft()
                if dist[u] == d:
                    v = u
                    break
            if v >= 0:
                break
        if v < 0:
            # new seed: only vertices with no selected vertex within cap hops remain
            while pos < n and dist[perm[pos]] <= cap:
                pos += 1
            if pos == n:
                break
            v = perm[pos]
        selected.append(v)
        dist[v] = 0
        stamp[v] = v
        front = [v]
        for d in range(1, cap + 1):
            nxt = []
            for u in front:
                for w in indices[indptr[u]:indptr[u + 1]]:
                    if stamp[w] != v:
                        stamp[w] = v
                        nxt.append(w)
                        if d < dist[w]:
                            dist[w] = d
                            if d > k:
                                buckets[d].append(w)
            if not nxt:
                break
            front = nxt
    return np.array(sorted(selected), dtype=np.int64)


def build_aggregates(g: Graph, S, k: int) -> Partition:
    """Grow one aggregate per root in ``S`` by simultaneous BFS rounds.

    In each round every unassigned neighbor of the previous round's front
    joins an adjacent aggregate; on ties the smallest root id wins. Raises
    ``ValueError`` if some vertex is still unassigned after ``k`` rounds,
    which means ``S`` was not maximal.
    """
    n = g.num_vertices
    roots = np.unique(np.asarray(S, dtype=np.int64))
    agg = np.full(n, -1, dtype=np.int64)
    agg[roots] = np.arange(roots.size)
    indptr, indices = _adjacency_lists(g)
    front = roots
    for _ in range(k):
        if front.size == 0:
            break
        starts = indptr[front]
        counts = indptr[front + 1] - starts
        owner = np.repeat(agg[front], counts)
        offs = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
        nbr = indices[offs]
        free = agg[nbr] < 0
        nbr, owner = nbr[free], owner[free]
        if nbr.size == 0:
            break
        best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(best, nbr, owner)
        front = np.unique(nbr)
        agg[front] = best[front]
    if np.any(agg < 0):
        missing = int(np.flatnonzero(agg < 0)[0])
        raise ValueError(f"vertex {missing} unreached after {k} rounds: root set is not maximal")
    return Partition(agg, roots, np.bincount(agg, minlength=roots.size))


def aggregate(g: Graph, k: int, seed=0, order: str = "greedy") -> Partition:
    """MIS on the graph of ``A^k`` followed by aggregate growth."""
    return build_aggregates(g, mis_distance_k(g, k, seed, order), k)


def interpolation(p: Partition) -> sp.csr_matrix:
    """Piecewise-constant interpolation ``P`` (n x n_H), one unit entry per row."""
    n = p.num_vertices
    return sp.csr_matrix((np.ones(n), p.aggregate_of, np.arange(n + 1)),
                         shape=(n, p.num_aggregates))


def project_Q(p: Partition, v) -> np.ndarray:
    """l2-orthogonal projection onto piecewise constants: aggregate averages."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != p.num_vertices:
        raise ValueError("vector length does not match partition")
    means = np.bincount(p.aggregate_of, weights=v, minlength=p.num_aggregates) / p.sizes
    return means[p.aggregate_of]


def galerkin(A, p: Partition) -> sp.csr_matrix:
    """Coarse operator ``P^T A P`` by summing fine entries over aggregate blocks."""
    A = sp.csr_matrix(A)
    if A.shape != (p.num_vertices, p.num_vertices):
        raise ValueError(f"matrix shape {A.shape} does not match partition of {p.num_vertices}")
    rows = np.repeat(p.aggregate_of, np.diff(A.indptr))
    cols = p.aggregate_of[A.indices]
    nH = p.num_aggregates
    return _sp.canonicalize(sp.coo_matrix((A.data, (rows, cols)), shape=(nH, nH)))


def coarse_graph(g: Graph, p: Partition) -> Graph:
    """Quotient graph: aggregates joined iff some fine edge connects them."""
    e = p.aggregate_of[g.edges]
    e = np.sort(e[e[:, 0] != e[:, 1]], axis=1)
    if e.size:
        e = np.unique(e, axis=0)
    return Graph(p.num_aggregates, e.reshape(-1, 2))


def bfs_distances(g: Graph, source: int, max_depth: int | None = None) -> np.ndarray:
    """Hop distances from ``source`` (``-1`` for unreached / beyond ``max_depth``)."""
    indptr, indices = _adjacency_lists(g)
    dist = np.full(g.num_vertices, -1, dtype=np.int64)
    dist[source] = 0
    front = np.array([source])
    d = 0
    while front.size and (max_depth is None or d < max_depth):
        d += 1
        nbr = np.concatenate([indices[indptr[u]:indptr[u + 1]] for u in front])
        nbr = np.unique(nbr[dist[nbr] < 0])
        dist[nbr] = d
        front = nbr
    return dist


def _induced_components(g: Graph, p: Partition) -> int:
    e = g.edges
    inside = p.aggregate_of[e[:, 0]] == p.aggregate_of[e[:, 1]]
    e = e[inside]
    n = g.num_vertices
    M = sp.csr_matrix((np.ones(e.shape[0]), (e[:, 0], e[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(M, directed=False)
    return ncomp


def validate_partition(p: Partition, g: Graph, k: int | None = None) -> None:
    """Raise ``ValueError`` unless ``p`` is a valid aggregation of ``g``.

    Checks the disjoint cover, connectivity of every aggregate and, when
    ``k`` is given, that roots are pairwise more than ``k`` hops apart and
    that every vertex lies within ``k`` hops of a root.
    """
    n = g.num_vertices
    if p.num_vertices != n:
        raise ValueError("partition size does not match graph")
    agg = p.aggregate_of
    if agg.min(initial=0) < 0 or (n and agg.max() >= p.num_aggregates):
        raise ValueError("aggregate id out of range")
    if not np.array_equal(np.bincount(agg, minlength=p.num_aggregates), p.sizes):
        raise ValueError("sizes inconsistent with labels")
    if np.any(p.sizes == 0):
        raise ValueError("empty aggregate")
    if _induced_components(g, p) != p.num_aggregates:
        raise ValueError("some aggregate is not connected")
    if not np.array_equal(agg[p.roots], np.arange(p.num_aggregates)):
        raise ValueError("root does not belong to its aggregate")
    if k is not None:
        is_root = np.zeros(n, dtype=bool)
        is_root[p.roots] = True
        reached = np.zeros(n, dtype=bool)
        for r in p.roots:
            d = bfs_distances(g, int(r), max_depth=k)
            ball = d >= 0
            if np.count_nonzero(is_root & ball) != 1:
                raise ValueError(f"root {r} is within {k} hops of another root")
            reached |= ball
        if not reached.all():
            raise ValueError(f"vertex {int(np.flatnonzero(~reached)[0])} not within {k} hops of a root")


def aggregate_diameters(g: Graph, p: Partition) -> np.ndarray:
    """Hop diameter of each aggregate's induced subgraph (BFS from every member)."""
    diam = np.zeros(p.num_aggregates, dtype=np.int64)
    for l, members in enumerate(p.groups()):
        if members.size == 1:
            continue
        sub = _induced_subgraph(g, members)
        diam[l] = max(int(bfs_distances(sub, s).max()) for s in range(members.size))
    return diam


def _induced_subgraph(g: Graph, members: np.ndarray) -> Graph:
    local = np.full(g.num_vertices, -1, dtype=np.int64)
    local[members] = np.arange(members.size)
    e = local[g.edges]
    e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
    return Graph(members.size, e)


def write_partition(path, p: Partition) -> None:
    """Text export: line ``i`` holds the aggregate id of vertex ``i``."""
    np.savetxt(Path(path), p.aggregate_of, fmt="%d")


def read_partition(path) -> Partition:
    return Partition.from_labels(np.loadtxt(Path(path), dtype=np.int64, ndmin=1))
