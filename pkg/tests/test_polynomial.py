import math

import mpmath
import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from uaamli import polynomial as poly
from uaamli.problems import grid2d
from uaamli.sparse import inf_norm

from conftest import dense_eval


def oracle_Em(m, kappa):
    """Closed form in 30-digit arithmetic, independent of the float implementation."""
    mpmath.mp.dps = 30
    s = mpmath.sqrt(kappa)
    return float(((s - 1) / (s + 1)) ** m * (kappa - 1) / 2)


def test_error_Em_m4_kappa10():
    assert poly.error_Em(4, 10) == pytest.approx(oracle_Em(4, 10), rel=1e-14)
    assert poly.error_Em(4, 10) == pytest.approx(0.3277436, abs=1e-7)


def test_error_Em_degree_zero():
    assert poly.error_Em(0, 10) == 4.5


def test_error_Em_degenerate_interval():
    for m in (1, 4, 9):
        assert poly.error_Em(m, 1 + 1e-12) < 1e-9


def test_error_Em_rejects_kappa():
    with pytest.raises(ValueError):
        poly.error_Em(3, 1.0)


def test_build_m4_level():
    s = poly.build(0.1, 1.0, 4)
    assert s.level == pytest.approx(oracle_Em(4, 10), rel=1e-8)
    assert s.Em == pytest.approx(oracle_Em(4, 10), rel=1e-14)


def test_build_scale_invariance():
    a, b = poly.build(0.1, 1, 4), poly.build(0.2, 2, 4)
    x = np.linspace(0.1, 1, 2001)
    assert a.Em == b.Em
    np.testing.assert_allclose(a.damping(x), b.damping(2 * x), atol=1e-12)


@pytest.mark.parametrize("args", [(0, 1, 3), (1, 0.5, 3), (0.1, 1, 0)])
def test_build_bad_input(args):
    with pytest.raises(ValueError):
        poly.build(*args)


def test_build_remez_failure_is_reported():
    with pytest.raises(poly.RemezError):
        poly.remez_inverse(0.1, 1.0, 6, maxiter=1, tol=1e-30)


def test_min_degree_examples():
    assert poly.min_degree(0.5, 10, 1) == 4
    assert poly.min_degree(0.9, 2, 1) == 1


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(1.5, 200), st.floats(0.1, 20))
def test_min_degree_monotone_in_rho(r1, r2, kappa, lam1):
    lo, hi = sorted((r1, r2))
    assert poly.min_degree(lo, kappa, lam1) >= poly.min_degree(hi, kappa, lam1)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(1.5, 200), st.floats(0.1, 20))
def test_min_degree_is_smallest(rho, kappa, lam1):
    m = poly.min_degree(rho, kappa, lam1)
    ld = abs(math.log((math.sqrt(kappa) - 1) / (math.sqrt(kappa) + 1)))
    bound = max(abs(math.log(2 * rho / (kappa - 1))), abs(math.log(2 / (lam1 * (kappa - 1))))) / ld
    assert m >= bound - 1e-9
    assert m == 1 or m - 1 < bound


@pytest.mark.parametrize("kappa", [2.0, 10.0, 100.0])
@pytest.mark.parametrize("m", range(1, 9))
def test_equioscillation(m, kappa):
    s = poly.build(1.0 / kappa, 1.0, m, check_positive=False)
    x = s.alternation
    assert x.size == m + 2
    assert x[-1] == 1.0
    e = s.error(x)
    assert np.all(np.sign(e[:-1]) != np.sign(e[1:]))
    spread = (np.abs(e).max() - np.abs(e).min()) / np.abs(e).max()
    assert spread <= 1e-8
    assert s.level == pytest.approx(oracle_Em(m, kappa), rel=1e-8)


def test_q_at_lambda1_sign():
    # 1/x - q alternates and is negative at lambda1 for even m, positive for odd m
    for m in range(1, 9):
        s = poly.build(0.1, 1.0, m, check_positive=False)
        expected = (1 + (-1) ** m * s.Em)
        assert float(s(1.0)) == pytest.approx(expected, rel=1e-8)


def test_positivity_rejection():
    # E_1(100) > 1, so q_1(lambda1) = (1 - E_1) / lambda1 < 0
    with pytest.raises(ValueError, match="not positive"):
        poly.build(0.01, 1.0, 1)


def test_positivity_when_bound_holds():
    for rho, kappa, lam1 in [(0.5, 10, 1.0), (0.3, 4, 2.0), (0.5, 30, 1.0)]:
        m = poly.min_degree(rho, kappa, lam1)
        s = poly.build(lam1 / kappa, lam1, m)
        x = np.linspace(0, lam1, 100001)[1:]
        assert np.all(s(x) > 0)
        assert s.Em <= rho


def test_apply_diag_lambda1():
    s = poly.build(0.8, 8.0, 4)
    A = sp.diags([8.0, 8.0, 8.0]).tocsr()
    y = poly.apply(s, A, np.array([1.0, 0, 0]))
    assert y[0] == pytest.approx(float(s(8.0)), abs=1e-13)
    assert y[1] == 0 and y[2] == 0


def test_apply_damping_bound(rng):
    s = poly.build(0.1, 1.0, 4)
    x = rng.uniform(0.1, 1.0, 50)
    y = poly.apply(s, sp.diags(x).tocsr(), np.ones(50))
    assert np.all(np.abs(1 - x * y) <= s.Em + 1e-10)


def test_apply_linear(rng):
    s = poly.build(0.8, 8.0, 5)
    A = grid2d(6).A
    r = rng.standard_normal(36)
    np.testing.assert_allclose(poly.apply(s, A, 3.5 * r), 3.5 * poly.apply(s, A, r), rtol=1e-13)


def test_apply_uses_m_products(rng):
    class Counting:
        def __init__(self, A):
            self.A, self.count, self.shape = A, 0, A.shape

        def __matmul__(self, v):
            self.count += 1
            return self.A @ v

    for m in (1, 2, 4, 7):
        s = poly.build(0.8, 8.0, m, check_positive=False)
        A = Counting(grid2d(5).A)
        poly.apply(s, A, rng.standard_normal(25))
        assert A.count == m


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        poly.apply(poly.build(0.1, 1, 2), sp.identity(3, format="csr"), np.ones(4))


@pytest.mark.parametrize("m", [1, 3, 4, 8])
def test_matrix_function_vs_dense(m, rng):
    for n in (5, 20, 40):
        G = rng.standard_normal((n, n))
        A = G @ G.T
        lam1 = np.abs(A).sum(axis=1).max()
        s = poly.build(lam1 / 10, lam1, m, check_positive=False)
        r = rng.standard_normal(n)
        ref = dense_eval(A, s) @ r
        assert np.linalg.norm(poly.apply(s, A, r) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_R_is_spd_on_grid():
    A = grid2d(8).A
    lam1 = inf_norm(A)
    s = poly.build(lam1 / 10, lam1, 4)
    R = np.column_stack([poly.apply(s, A, e) for e in np.eye(64)])
    np.testing.assert_allclose(R, R.T, atol=1e-12)
    assert np.linalg.eigvalsh(0.5 * (R + R.T)).min() > 0


def test_smoothed_iterate_fixed_point(rng):
    A = grid2d(5).A
    s = poly.build(0.8, 8, 4)
    u = rng.standard_normal(25)
    np.testing.assert_allclose(poly.smoothed_iterate(s, A, A @ u, u), u, rtol=1e-14)


def test_smoothed_iterate_scalar():
    s = poly.build(0.1, 1.0, 4)
    y = poly.smoothed_iterate(s, sp.identity(1, format="csr"), np.zeros(1), np.ones(1))
    assert y[0] == pytest.approx(1 - float(s(1.0)), abs=1e-14)


def test_smoothed_iterate_error_damping(rng):
    A0 = grid2d(8).A
    A = A0 / inf_norm(A0)
    s = poly.build(0.1, 1.0, 4)
    w, V = np.linalg.eigh(A.toarray())
    e0 = rng.standard_normal(64)
    e1 = -poly.smoothed_iterate(s, A, np.zeros(64), -e0)
    c0, c1 = V.T @ e0, V.T @ e1
    inside = (w >= 0.1) & (w <= 1.0)
    assert np.all(np.abs(c1[inside]) <= (s.Em + 1e-10) * np.abs(c0[inside]))


def test_write_diagnostics(tmp_path):
    s = poly.build(0.1, 1, 3)
    poly.write_diagnostics(tmp_path / "d.csv", s)
    rows = (tmp_path / "d.csv").read_text().splitlines()
    assert rows[0] == "kind,index,value,error"
    assert sum(r.startswith("coeff") for r in rows) == 4
    assert sum(r.startswith("alternation") for r in rows) == 5
