import numpy as np
import pytest
import scipy.sparse as sp

from uaamli.problems import Graph, laplacian_from_graph


def path_graph(n):
    return Graph(n, [[i, i + 1] for i in range(n - 1)])


def path_laplacian(n):
    return laplacian_from_graph(path_graph(n)).A


def random_connected_graph(rng, n, extra=None):
    """Random spanning tree plus ``extra`` random edges (unit weights)."""
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    extra = n if extra is None else extra
    while extra > 0:
        i, j = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        if (i, j) not in edges:
            edges.add((i, j))
            extra -= 1
    return Graph(n, sorted(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_eval(A, fn):
    """``fn(A)`` for a symmetric matrix by eigendecomposition."""
    w, V = np.linalg.eigh(A.toarray() if sp.issparse(A) else A)
    return (V * fn(w)) @ V.T


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
