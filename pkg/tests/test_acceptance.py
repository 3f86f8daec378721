"""Acceptance criteria 1-12, one PASS/FAIL line each in the terminal summary.

The large solves of criteria 9 and 10 (2D up to 512^2, 3D 64^3) dominate the
runtime, roughly half a minute on a desktop core.
"""

import math
import time

import mpmath
import numpy as np
import pytest
import scipy.sparse as sp

from uaamli import aggregation as ag
from uaamli import analysis as an
from uaamli import multilevel as ml
from uaamli import polynomial as poly
from uaamli.experiments import RunConfig, run_solve
from uaamli.krylov import fcg, pcg
from uaamli.problems import Graph, grid2d, grid3d, laplacian_from_graph, manufacture_rhs
from uaamli.sparse import max_row_nnz

from conftest import dense_eval, random_connected_graph, record_criterion


def check(number, ok, detail):
    record_criterion(number, bool(ok), detail)
    assert ok, detail


def oracle_Em(m, kappa):
    mpmath.mp.dps = 30
    s = mpmath.sqrt(kappa)
    return float(((s - 1) / (s + 1)) ** m * (kappa - 1) / 2)


def test_criterion_01_polynomial_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for kappa in (2.0, 10.0, 100.0):
        for m in range(1, 9):
            s = poly.build(1.0 / kappa, 1.0, m, check_positive=False)
            x = np.linspace(1.0 / kappa, 1.0, 100_000)
            measured = np.abs(s.damping(x)).max()
            worst = max(worst, abs(measured - poly.error_Em(m, kappa)) / poly.error_Em(m, kappa))
    elapsed = time.perf_counter() - t0
    s4 = poly.build(0.1, 1.0, 4)
    e4 = np.abs(s4.damping(np.linspace(0.1, 1.0, 100_000))).max()
    # The stated literal 0.3278197 comes from delta = 0.5195245; the true delta for
    # kappa = 10 is 0.5194938, and the closed form evaluates to 0.32774356 (30 digits).
    # No implementation can match both the closed form and that literal.
    literal_gap = abs(0.3278197 - oracle_Em(4, 10))
    ok = worst <= 1e-6 and elapsed < 5 and abs(e4 - oracle_Em(4, 10)) <= 1e-6 and literal_gap > 1e-6
    check(1, ok, f"max rel dev from E_m = {worst:.1e} over 24 cases in {elapsed:.2f}s; "
                 f"E_4(10) measured {e4:.7f} vs 30-digit closed form {oracle_Em(4, 10):.7f} "
                 f"(stated literal 0.3278197 is off the formula by {literal_gap:.1e})")


def test_criterion_02_degree_rule():
    m = poly.min_degree(0.5, 10, 1)
    check(2, m == 4, f"min_degree(0.5, 10, 1) = {m}")


def test_criterion_03_equioscillation():
    smoothers = [poly.build(1.0 / k, 1.0, m, check_positive=False)
                 for k in (2.0, 10.0, 100.0) for m in range(1, 9)]
    h = ml.setup(grid2d(128))
    smoothers += [lev.smoother for lev in h.levels[:-1]]
    worst, ok = 0.0, True
    for s in smoothers:
        x = s.alternation
        e = s.error(x)
        ok &= x.size == s.degree + 2 and x[-1] == s.lambda1
        ok &= bool(np.all(np.sign(e[:-1]) == -np.sign(e[1:])))
        worst = max(worst, (np.abs(e).max() - np.abs(e).min()) / np.abs(e).max())
    check(3, ok and worst <= 1e-8,
          f"{len(smoothers)} smoothers, m+2 alternating points with lambda1 last, "
          f"max relative spread {worst:.1e}")


def test_criterion_04_matrix_function():
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (2, 5, 10, 20, 40):
        for m in (1, 2, 4, 6, 8):
            G = rng.standard_normal((n, n))
            A = G @ G.T
            lam1 = np.abs(A).sum(axis=1).max()
            s = poly.build(lam1 / 10, lam1, m, check_positive=False)
            r = rng.standard_normal(n)
            ref = dense_eval(A, s) @ r
            worst = max(worst, np.linalg.norm(poly.apply(s, sp.csr_matrix(A), r) - ref)
                        / np.linalg.norm(ref))
    check(4, worst <= 1e-10, f"max relative deviation from eigendecomposition {worst:.1e}")


def test_criterion_05_partition_invariants():
    t0 = time.perf_counter()
    factors = []
    for make, n in ((grid2d, 64), (grid3d, 16)):
        g = make(n).graph
        for order in ("frontier", "greedy"):
            p = ag.aggregate(g, 4, seed=[0, 0], order=order)
            ag.validate_partition(p, g, 4)
            factors.append(p.coarsening_factor)
    elapsed = time.perf_counter() - t0
    ok = all(15 <= f <= 60 for f in factors) and elapsed < 10
    check(5, ok, "coarsening factors 2D frontier/greedy {:.1f}/{:.1f}, 3D {:.1f}/{:.1f}; "
                 "cover, connectivity, root distance > 4 and maximality verified by BFS "
                 "in {:.1f}s".format(*factors, elapsed))


def test_criterion_06_galerkin_oracle():
    rng = np.random.default_rng(6)
    worst, rowsum = 0.0, 0.0
    for trial in range(50):
        n = int(rng.integers(5, 201))
        if trial % 2:
            g = random_connected_graph(rng, n, extra=int(rng.integers(0, n)))
            g = Graph(n, g.edges, rng.random(g.num_edges) + 0.1)
            A = laplacian_from_graph(g).A
            p = ag.aggregate(g, int(rng.integers(1, 4)), seed=trial)
        else:
            M = sp.random(n, n, density=0.1, random_state=trial)
            A = (M + M.T).tocsr()
            labels = rng.integers(0, max(1, n // 4), n)
            p = ag.Partition.from_labels(np.unique(labels, return_inverse=True)[1])
        P = ag.interpolation(p).toarray()
        ref = P.T @ A.toarray() @ P
        AH = ag.galerkin(A, p).toarray()
        worst = max(worst, np.abs(AH - ref).max() / max(1.0, np.abs(ref).max()))
        if trial % 2:
            rowsum = max(rowsum, np.abs(AH.sum(axis=1)).max())
    check(6, worst <= 1e-14 and rowsum <= 1e-12,
          f"50 instances: max entrywise deviation {worst:.1e}, Laplacian coarse row sums <= {rowsum:.1e}")


def test_criterion_07_weak_approximation():
    rng = np.random.default_rng(7)
    cases = []
    g8 = grid2d(8)
    for i in range(10):
        p = ag.aggregate(g8.graph, int(rng.integers(1, 4)), seed=i,
                         order=["greedy", "frontier"][i % 2])
        cases.append((g8.graph, g8.A, p))
    for i in range(10):
        n = int(rng.integers(10, 101))
        g = random_connected_graph(rng, n, extra=int(rng.integers(0, n)))
        cases.append((g, laplacian_from_graph(g).A, ag.aggregate(g, int(rng.integers(1, 4)), seed=i)))
    violations, worst = 0, 0.0
    for g, A, p in cases:
        c_p = an.poincare_constant(an.local_poincare(p, g))
        for v in rng.standard_normal((1000, g.num_vertices)):
            lhs, rhs = an.check_wap(p, g, v, c_p=c_p, A=A)
            violations += lhs > rhs
            worst = max(worst, lhs / rhs)
    check(7, violations == 0, f"20 partitions x 1000 vectors: {violations} violations, "
                              f"max lhs/rhs {worst:.3f}")


def test_criterion_08_two_level_equivalence():
    t0 = time.perf_counter()
    p = grid2d(16)
    part = ag.aggregate(p.graph, 2, seed=0)
    s = poly.build(0.8, 8.0, 4)
    kappa, mu = an.measure_two_level(p.A, part, s, kernel=p.kernel)
    c_p = an.poincare_constant(an.local_poincare(part, p.graph))
    c_0 = an.measure_Q_stability(part, p.A, p.kernel)
    bound = an.ktg_bound(c_0, c_p, max_row_nnz(p.A), 4)
    elapsed = time.perf_counter() - t0
    ok = mu[0] > 0 and mu[-1] <= 1 + 1e-8 and kappa <= bound and elapsed < 30
    check(8, ok, f"eig(BA) in [{mu[0]:.4f}, {mu[-1]:.12f}], kappa_TL = {kappa:.3f} <= "
                 f"K_TG = {bound:.1f} (c_0 {c_0:.3f}, c_p {c_p:.3f}) in {elapsed:.1f}s")


@pytest.fixture(scope="module")
def table():
    runs = {}
    for prob, sizes in (("grid2d", (128, 256, 512)), ("grid3d", (64,))):
        for n in sizes:
            for cycle in ("amli", "namli"):
                cfg = RunConfig(problem=prob, n=n, cycle=cycle)
                rep, h = run_solve(cfg)
                runs[prob, n, cycle] = (rep, h.complexities())
    return runs


def test_criterion_09_table_reproduction(table):
    it = {k: v[0].iterations for k, v in table.items()}
    conv = all(v[0].converged for v in table.values())
    a2 = [it["grid2d", n, "amli"] for n in (128, 256, 512)]
    n2 = [it["grid2d", n, "namli"] for n in (128, 256, 512)]
    a3, n3 = it["grid3d", 64, "amli"], it["grid3d", 64, "namli"]
    ok = (conv and 12 <= a2[-1] <= 32 and 12 <= n2[-1] <= 30 and n2[-1] <= a2[-1] + 1
          and all(b - a <= 4 for seq in (a2, n2) for a, b in zip(seq, seq[1:]))
          and 14 <= a3 <= 35 and 14 <= n3 <= 33)
    check(9, ok, f"2D 128/256/512 AMLI {a2} N-AMLI {n2}; 3D 64^3 AMLI {a3} N-AMLI {n3}")


def test_criterion_10_complexities(table):
    g2, o2 = table["grid2d", 256, "namli"][1]
    g3, o3 = table["grid3d", 64, "namli"][1]
    ok = g2 < 1.05 and o2 < 1.06 and g3 < 1.05 and o3 < 1.06
    check(10, ok, f"grid/operator complexity 2D 256^2 {g2:.4f}/{o2:.4f}, 3D 64^3 {g3:.4f}/{o3:.4f}")


def test_criterion_11_krylov_equivalence():
    p = grid2d(8)
    u, f = manufacture_rhs(p, seed=11)
    h = ml.setup(p, ml.CycleConfig(cycle="amli", mis_power=2, coarsest_size=10))
    B = h.preconditioner()
    worst = 0.0
    for k in range(1, 16):
        xp, _ = pcg(p.A, f, B, tol=1e-30, max_iter=k, kernel=p.kernel)
        xf, _ = fcg(p.A, f, B, tol=1e-30, max_iter=k, restart=k, kernel=p.kernel)
        worst = max(worst, np.abs(xf - xp).max() / np.abs(xp).max())
    check(11, worst <= 1e-10, f"{h.num_levels}-level AMLI preconditioner, iterates 1..15: "
                              f"max relative deviation {worst:.1e}")


def test_criterion_12_determinism():
    out = []
    for _ in range(2):
        for cycle in ("amli", "namli"):
            cfg = RunConfig(n=128, cycle=cycle, seed=5)
            rep, h = run_solve(cfg)
            out.append((cycle, rep.iterations, h.fingerprint(), rep.a_norm_error))
    ok = out[:2] == out[2:]
    check(12, ok, "grid2d(128), seed 5, each cycle run twice: AMLI {} and N-AMLI {} iterations "
                  "both times, hierarchy hashes and error histories identical: {}".format(
                      out[0][1], out[1][1], ok))
