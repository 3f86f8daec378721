"""Unsmoothed aggregation AMLI and nonlinear AMLI for graph Laplacians.

Subpackages by task:

``sparse``       CSR helpers, dense (deflated) coarse solver, Matrix Market I/O
``problems``     graph Laplacian instances and manufactured right-hand sides
``aggregation``  distance-k MIS aggregation, interpolation, Galerkin product
``polynomial``   best uniform approximation to 1/x as a smoother
``multilevel``   hierarchy setup and the AMLI / N-AMLI cycles
``krylov``       PCG and flexible CG with A-norm error monitoring
``analysis``     measured two-level constants on small instances
``experiments``  end-to-end runs behind the ``uaamli`` command
"""

from .aggregation import Partition, aggregate
from .krylov import AnormErrorMonitor, fcg, pcg
from .multilevel import CycleConfig, Hierarchy, setup
from .polynomial import PolySmoother
from .problems import Graph, ProblemInstance, grid2d, grid3d, manufacture_rhs, read_graph

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "ProblemInstance",
    "grid2d",
    "grid3d",
    "read_graph",
    "manufacture_rhs",
    "Partition",
    "aggregate",
    "PolySmoother",
    "CycleConfig",
    "Hierarchy",
    "setup",
    "pcg",
    "fcg",
    "AnormErrorMonitor",
]
