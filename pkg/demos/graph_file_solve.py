"""
Solving on a graph read from a file
===================================

Any connected graph can be loaded from an edge list or a Matrix Market
file. Here a random geometric graph is written to an edge list, read back
and solved with the nonlinear AMLI preconditioner.
"""

import tempfile
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from uaamli.experiments import RunConfig, run_solve
from uaamli.problems import Graph, read_graph, write_edge_list

rng = np.random.default_rng(0)
pts = rng.random((20_000, 2))
pairs = cKDTree(pts).query_pairs(r=0.012, output_type="ndarray")

# keep the largest connected component
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

n = len(pts)
adj = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
_, comp = connected_components(adj, directed=False)
keep = comp == np.bincount(comp).argmax()
relabel = -np.ones(n, dtype=int)
relabel[keep] = np.arange(keep.sum())
e = relabel[pairs]
e = e[(e >= 0).all(axis=1)]
g = Graph(int(keep.sum()), e)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "geometric.txt"
    write_edge_list(path, g)
    problem = read_graph(path)
    print(f"{problem.n} vertices, {g.num_edges} edges, max degree {int(problem.A.diagonal().max())}")
    for cycle in ("amli", "namli"):
        cfg = RunConfig(problem="graph-file", path=str(path), cycle=cycle)
        rep, h = run_solve(cfg, problem)
        gc, oc = rep.complexities
        print(f"{cycle:6s}: {rep.iterations} iterations, levels {[lev.n for lev in h.levels]}, "
              f"complexities {gc:.3f} / {oc:.3f}")
