"""Preconditioned and flexible conjugate gradients.

Both solvers stop either on the relative A-norm of the error (when an
:class:`AnormErrorMonitor` with the exact solution is supplied) or, blind,
on the relative preconditioned residual ``sqrt(r^T B r)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BreakdownError", "SolveReport", "AnormErrorMonitor", "pcg", "fcg"]


class BreakdownError(ArithmeticError):
    """Non-positive curvature: the operator or preconditioner is not SPD."""


@dataclass
class SolveReport:
    iterations: int = 0
    converged: bool = False
    a_norm_error: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    complexities: tuple | None = None
    config: dict | None = None

    @property
    def final_rel_a_norm_error(self):
        return self.a_norm_error[-1] if self.a_norm_error else None


class AnormErrorMonitor:
    """Relative A-norm error ``|x - u*|_A / |x_0 - u*|_A`` against a known solution."""

    def __init__(self, A, u_star):
        self.A = A
        self.u_star = np.asarray(u_star, dtype=np.float64)
        self.e0 = None

    def a_norm(self, x) -> float:
        e = x - self.u_star
        return float(np.sqrt(max(e @ (self.A @ e), 0.0)))

    def start(self, x0) -> float:
        self.e0 = self.a_norm(x0)
        return 1.0

    def __call__(self, x) -> float:
        if self.e0 is None:
            raise RuntimeError("monitor.start(x0) must be called first")
        if self.e0 == 0.0:
            return 0.0
        return self.a_norm(x) / self.e0


def _projector(kernel):
    if kernel is None:
        return lambda v: v
    k = np.asarray(kernel, dtype=np.float64)
    kk = float(k @ k)
    return lambda v: v - (float(v @ k) / kk) * k


def _init(A, f, x0, monitor, kernel):
    f = np.asarray(f, dtype=np.float64)
    x = np.zeros_like(f) if x0 is None else np.array(x0, dtype=np.float64)
    proj = _projector(kernel)
    r = proj(f - A @ x)
    rep = SolveReport()
    r0 = float(np.linalg.norm(r))
    rep.residual.append(1.0)
    if monitor is not None:
        rep.a_norm_error.append(monitor.start(x))
    return f, x, r, r0, proj, rep


def _record(rep, r, r0, x, monitor):
    rep.residual.append(float(np.linalg.norm(r)) / r0 if r0 else 0.0)
    if monitor is not None:
        rep.a_norm_error.append(monitor(x))


def pcg(A, f, B=None, x0=None, tol=1e-8, max_iter=200, monitor=None, kernel=None):
    """Preconditioned conjugate gradients with a fixed SPD preconditioner ``B``.

    Parameters
    ----------
    A : sparse matrix or ndarray
        Symmetric positive (semi-)definite operator.
    f : ndarray
        Right-hand side, orthogonal to ``kernel`` when given.
    B : callable, optional
        ``r -> B r``; identity when omitted.
    tol : float
        Stopping tolerance on the monitored relative A-norm error, or on
        ``sqrt(r^T B r)`` relative to its initial value when ``monitor`` is
        None.
    kernel : ndarray, optional
        Null vector of ``A``; residuals and preconditioned residuals are
        kept orthogonal to it.

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    B = B if B is not None else (lambda v: v.copy())
    f, x, r, r0, proj, rep = _init(A, f, x0, monitor, kernel)
    z = proj(B(r))
    rz = float(r @ z)
    rz0 = rz
    if monitor is not None:
        done = rep.a_norm_error[0] <= tol
    else:
        done = rz0 == 0.0 or 1.0 <= tol
    if rz < 0:
        raise BreakdownError(f"r^T B r = {rz:.3e} < 0: preconditioner not positive")
    p = z.copy()
    it = 0
    while not done and it < max_iter:
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0:
            raise BreakdownError(f"p^T A p = {pAp:.3e} at iteration {it + 1}")
        alpha = rz / pAp
        x += alpha * p
        r = proj(r - alpha * Ap)
        it += 1
        z = proj(B(r))
        rz_new = float(r @ z)
        _record(rep, r, r0, x, monitor)
        if monitor is not None:
            done = rep.a_norm_error[-1] <= tol
        else:
            done = rz_new <= 0.0 or np.sqrt(rz_new / rz0) <= tol
        if done:
            break
        if rz_new < 0:
            raise BreakdownError(f"r^T B r = {rz_new:.3e} < 0 at iteration {it}")
        p = z + (rz_new / rz) * p
        rz = rz_new
    rep.iterations = it
    rep.converged = bool(done)
    return x, rep


def fcg(A, f, B=None, x0=None, tol=1e-8, max_iter=200, restart=5, monitor=None,
        kernel=None, stats=None):
    """Flexible (nonlinear) preconditioned conjugate gradients.

    Each new direction ``B r`` is A-orthogonalized against the directions
    stored since the last restart; the store is cleared after every
    ``restart`` iterations, so at most ``restart`` directions are kept.
    ``tol=None`` runs exactly ``max_iter`` iterations (stopping early only
    on an exactly zero residual). ``stats``, when a dict, receives the peak
    number of stored directions under ``"max_memory"``.
    """
    if restart < 1:
        raise ValueError("restart must be >= 1")
    B = B if B is not None else (lambda v: v.copy())
    f, x, r, r0, proj, rep = _init(A, f, x0, monitor, kernel)
    mem = []
    peak = 0
    rz0 = None
    it = 0
    done = False
    if tol is not None and monitor is not None:
        done = rep.a_norm_error[0] <= tol
    while not done and it < max_iter:
        if not r.any():
            done = True
            break
        z = proj(B(r))
        if tol is not None and monitor is None:
            rz = float(r @ z)
            if rz < 0:
                raise BreakdownError(f"r^T B r = {rz:.3e} < 0 at iteration {it}")
            if rz0 is None:
                rz0 = rz
                if rz0 == 0.0 or tol >= 1.0:
                    done = True
                    break
            elif np.sqrt(rz / rz0) <= tol:
                done = True
                break
        d = z.copy()
        for di, Adi, dAdi in mem:
            d -= (float(z @ Adi) / dAdi) * di
        Ad = A @ d
        dAd = float(d @ Ad)
        if dAd <= 0:
            raise BreakdownError(f"d^T A d = {dAd:.3e} at iteration {it + 1}")
        alpha = float(d @ r) / dAd
        x += alpha * d
        r = proj(r - alpha * Ad)
        it += 1
        mem.append((d, Ad, dAd))
        peak = max(peak, len(mem))
        if len(mem) >= restart:
            mem.clear()
        _record(rep, r, r0, x, monitor)
        if tol is not None and monitor is not None:
            done = rep.a_norm_error[-1] <= tol
    if stats is not None:
        stats["max_memory"] = peak
    rep.iterations = it
    rep.converged = bool(done) if tol is not None else True
    return x, rep
