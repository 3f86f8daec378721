import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from uaamli import sparse as S
from uaamli.problems import grid2d

from conftest import path_laplacian


def test_spmv_constant_in_kernel():
    np.testing.assert_array_equal(S.spmv(path_laplacian(4), np.ones(4)), np.zeros(4))


def test_spmv_identity():
    x = np.array([2.0, 5.0, -1.0])
    np.testing.assert_array_equal(S.spmv(sp.identity(3, format="csr"), x), x)


def test_spmv_path4_stencil():
    y = S.spmv(path_laplacian(4), np.array([0.0, 1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(y, [-1.0, 0.0, 0.0, 1.0])


def test_spmv_dimension_mismatch():
    with pytest.raises(ValueError):
        S.spmv(path_laplacian(4), np.ones(3))


def test_inf_norm_examples():
    assert S.inf_norm(path_laplacian(4)) == 4
    assert S.inf_norm(sp.identity(7, format="csr")) == 1
    assert S.inf_norm(grid2d(3).A) == 8


def test_dense_pseudo_solve_path2():
    x = S.dense_pseudo_solve(path_laplacian(2), np.array([1.0, -1.0]), np.ones(2))
    np.testing.assert_allclose(x, [0.5, -0.5], atol=1e-15)


def test_dense_pseudo_solve_identity(rng):
    b = rng.standard_normal(5)
    np.testing.assert_allclose(S.dense_pseudo_solve(np.eye(5), b), b, rtol=1e-15)


def test_dense_pseudo_solve_path3():
    A = path_laplacian(3)
    b = np.array([1.0, 0.0, -1.0])
    x = S.dense_pseudo_solve(A, b, np.ones(3))
    assert np.linalg.norm(A @ x - b) < 1e-12
    assert abs(x.sum()) < 1e-12


def test_dense_pseudo_solve_inconsistent():
    with pytest.raises(ValueError, match="inconsistent"):
        S.dense_pseudo_solve(path_laplacian(3), np.array([1.0, 0.0, 0.0]), np.ones(3))


def test_dense_solver_not_factorizable():
    with pytest.raises(Exception):
        S.DenseSolver(np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_dense_pseudo_solve_random_consistent(rng):
    for n in (5, 50, 200):
        G = rng.standard_normal((n, n))
        W = np.triu(np.abs(G) * (rng.random((n, n)) < 0.1), 1)
        W = W + W.T
        np.fill_diagonal(W, 0)
        W[np.arange(n - 1), np.arange(1, n)] = W[np.arange(1, n), np.arange(n - 1)] = 1.0
        A = np.diag(W.sum(axis=1)) - W
        b = A @ rng.standard_normal(n)
        b -= b.mean()
        x = S.dense_pseudo_solve(A, b, np.ones(n))
        assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_assemble_examples():
    A = S.assemble([(0, 0, 1), (0, 0, 1)])
    assert A.nnz == 1 and A[0, 0] == 2
    A = S.assemble([(0, 1, -1), (1, 0, -1), (0, 0, 1), (1, 1, 1)])
    np.testing.assert_array_equal(A.toarray(), path_laplacian(2).toarray())
    assert S.assemble([(0, 0, 1), (0, 1, 0)]).nnz == 1


def test_assemble_out_of_range():
    with pytest.raises(IndexError):
        S.assemble([(0, 2, 1.0)], shape=(2, 2))


def _check_csr_invariants(A):
    assert A.indptr[0] == 0 and A.indptr[-1] == A.data.size
    assert np.all(np.diff(A.indptr) >= 0)
    for i in range(A.shape[0]):
        cols = A.indices[A.indptr[i]:A.indptr[i + 1]]
        assert np.all(np.diff(cols) > 0)
    assert np.all(A.data != 0)


triplets = st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9),
                              st.integers(-3, 3).map(float)), max_size=60)


@settings(max_examples=100, deadline=None)
@given(triplets)
def test_assemble_matches_dense_accumulation(trips):
    A = S.assemble(trips, shape=(10, 10))
    D = np.zeros((10, 10))
    for i, j, v in trips:
        D[i, j] += v
    np.testing.assert_array_equal(A.toarray(), D)
    _check_csr_invariants(A)


@settings(max_examples=50, deadline=None)
@given(triplets)
def test_symmetrized_assembly_is_symmetric(trips):
    sym = trips + [(j, i, v) for i, j, v in trips]
    A = S.assemble(sym, shape=(10, 10))
    assert S.is_symmetric(A)
    assert (A - A.T).nnz == 0


def test_spmv_columns(rng):
    A = S.canonicalize(sp.random(100, 100, density=0.05, random_state=3))
    for j in range(100):
        e = np.zeros(100)
        e[j] = 1.0
        np.testing.assert_array_equal(S.spmv(A, e), A.toarray()[:, j])


def test_max_row_nnz():
    assert S.max_row_nnz(grid2d(4).A) == 5


def test_matrix_market_roundtrip(tmp_path, rng):
    A = grid2d(5).A
    S.write_matrix_market(tmp_path / "a.mtx", A)
    B = S.read_matrix_market(tmp_path / "a.mtx")
    assert (A != B).nnz == 0
    G = S.canonicalize(sp.random(20, 20, density=0.2, random_state=4))
    S.write_matrix_market(tmp_path / "g.mtx", G)
    H = S.read_matrix_market(tmp_path / "g.mtx")
    np.testing.assert_array_equal(G.toarray(), H.toarray())
    assert "symmetric" in (tmp_path / "a.mtx").read_text().splitlines()[0]
