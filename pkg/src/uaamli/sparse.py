"""Sparse and small dense linear algebra primitives.

Matrices are ``scipy.sparse.csr_matrix`` objects in canonical form: sorted
column indices, no duplicates, no explicitly stored zeros, float64 values.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

__all__ = [
    "assemble",
    "canonicalize",
    "spmv",
    "inf_norm",
    "is_symmetric",
    "max_row_nnz",
    "DenseSolver",
    "dense_pseudo_solve",
    "read_matrix_market",
    "write_matrix_market",
]


def canonicalize(A) -> sp.csr_matrix:
    """Return a float64 CSR copy with summed duplicates, sorted rows, no zeros."""
    A = sp.csr_matrix(A, dtype=np.float64, copy=True)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def assemble(triplets, shape=None) -> sp.csr_matrix:
    """Assemble a CSR matrix from ``(i, j, value)`` triplets.

    Duplicate triplets are summed and entries that end up exactly zero are
    dropped. When ``shape`` is omitted it is inferred from the largest
    indices.
    """
    triplets = list(triplets)
    if triplets:
        rows, cols, vals = (np.asarray(c) for c in zip(*triplets))
        rows = rows.astype(np.int64)
        cols = cols.astype(np.int64)
        vals = vals.astype(np.float64)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    if shape is None:
        nr = int(rows.max()) + 1 if rows.size else 0
        nc = int(cols.max()) + 1 if cols.size else 0
        shape = (nr, nc)
    if rows.size and (rows.min() < 0 or cols.min() < 0
                      or rows.max() >= shape[0] or cols.max() >= shape[1]):
        raise IndexError(f"triplet index out of range for shape {shape}")
    A = sp.coo_matrix((vals, (rows, cols)), shape=shape)
    return canonicalize(A)


def spmv(A: sp.csr_matrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product ``A @ x`` with a dimension check."""
    x = np.asarray(x, dtype=np.float64)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, x has length {x.shape[0]}")
    return A @ x


def inf_norm(A) -> float:
    """Maximum absolute row sum."""
    if A.shape[0] == 0:
        raise ValueError("inf_norm of an empty matrix")
    A = sp.csr_matrix(A)
    return float(np.max(np.asarray(abs(A).sum(axis=1)).ravel()))


def is_symmetric(A, tol: float = 0.0) -> bool:
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        return False
    D = (A - A.T).tocsr()
    D.eliminate_zeros()
    if D.nnz == 0:
        return True
    return bool(np.max(np.abs(D.data)) <= tol * max(1.0, np.max(np.abs(A.data))))


def max_row_nnz(A) -> int:
    A = sp.csr_matrix(A)
    return int(np.max(np.diff(A.indptr))) if A.shape[0] else 0


class DenseSolver:
    """Factorized dense solver for a symmetric positive (semi-)definite matrix.

    With ``kernel`` given, the matrix is assumed singular with exactly that
    null vector; the rank-one shifted matrix ``A + s k k^T`` is Cholesky
    factorized, where ``s = ||A||_inf / ||k||^2`` puts the shifted kernel
    eigenvalue at ``||A||_inf``. Solutions are returned orthogonal to the
    kernel, i.e. the action of the pseudo-inverse on compatible data.

    Parameters
    ----------
    A : array_like or sparse matrix
        Symmetric positive semi-definite matrix.
    kernel : array_like, optional
        Null vector of ``A``.
    compat_tol : float
        Relative tolerance on ``(b, k) / (||b|| ||k||)`` above which a
        right-hand side is rejected as inconsistent.
    """

    def __init__(self, A, kernel=None, compat_tol: float = 1e-8):
        M = A.toarray() if sp.issparse(A) else np.array(A, dtype=np.float64)
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("DenseSolver needs a square matrix")
        self.n = M.shape[0]
        self.compat_tol = compat_tol
        if kernel is not None:
            k = np.asarray(kernel, dtype=np.float64)
            kk = float(k @ k)
            if kk == 0.0:
                raise ValueError("kernel vector is zero")
            if self.n and np.linalg.norm(M @ k) > 1e-10 * max(1.0, np.abs(M).max()) * np.sqrt(kk):
                raise ValueError("supplied kernel is not a null vector of A")
            scale = np.abs(M).sum(axis=1).max() if self.n else 1.0
            if scale == 0.0:
                scale = 1.0
            M = M + (scale / kk) * np.outer(k, k)
            self.kernel = k
            self._kk = kk
        else:
            self.kernel = None
        try:
            self._factor = scipy.linalg.cho_factor(M, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"dense factorization failed: {exc}") from None

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: solver is {self.n}, b has length {b.shape[0]}")
        if self.kernel is not None:
            k = self.kernel
            bk = float(b @ k)
            bnorm = float(np.linalg.norm(b))
            if abs(bk) > self.compat_tol * bnorm * np.sqrt(self._kk):
                raise ValueError(
                    f"inconsistent right-hand side: (b, kernel) = {bk:.3e} with |b| = {bnorm:.3e}")
            b = b - (bk / self._kk) * k
        x = scipy.linalg.cho_solve(self._factor, b, check_finite=False)
        if self.kernel is not None:
            x = x - (float(x @ self.kernel) / self._kk) * self.kernel
        return x

    __call__ = solve


def dense_pseudo_solve(A, b, kernel=None) -> np.ndarray:
    """Solve ``A x = b`` densely; with ``kernel``, return the solution orthogonal to it."""
    return DenseSolver(A, kernel).solve(b)


def read_matrix_market(path) -> sp.csr_matrix:
    """Read a Matrix Market coordinate file (1-based on disk) into canonical CSR."""
    M = scipy.io.mmread(str(path))
    if not sp.issparse(M):
        M = sp.csr_matrix(M)
    return canonicalize(M)


def write_matrix_market(path, A, symmetric: bool | None = None) -> None:
    """Write ``A`` in Matrix Market coordinate format with round-trip precision."""
    A = sp.coo_matrix(A)
    if symmetric is None:
        symmetric = is_symmetric(A)
    scipy.io.mmwrite(str(path), A, symmetry="symmetric" if symmetric else "general",
                     precision=17)
