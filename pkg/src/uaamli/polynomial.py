"""Polynomial smoother from the best uniform approximation to 1/x.

``q_m`` minimizes ``max |1/x - p(x)|`` over polynomials of degree ``m`` on
``[lambda0, lambda1]``. It is computed by a Remez exchange and stored in the
Chebyshev basis of ``t = (2x - lambda1 - lambda0) / (lambda1 - lambda0)``,
so that ``q_m(A) r`` can be applied with a Clenshaw recurrence.

With ``kappa = lambda1 / lambda0`` and
``delta = (sqrt(kappa) - 1) / (sqrt(kappa) + 1)`` the damping factor is

    E_m = max_{[lambda0, lambda1]} |1 - x q_m(x)| = delta**m * (kappa - 1) / 2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "RemezError",
    "PolySmoother",
    "remez_inverse",
    "build",
    "error_Em",
    "min_degree",
    "apply",
    "smoothed_iterate",
    "write_diagnostics",
]


class RemezError(RuntimeError):
    """Remez exchange did not equalize the alternation within its iteration cap."""


def error_Em(m: int, kappa: float) -> float:
    """Closed-form damping factor ``delta**m * (kappa - 1) / 2``."""
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    if m < 0:
        raise ValueError("degree must be non-negative")
    s = math.sqrt(kappa)
    delta = (s - 1) / (s + 1)
    return delta ** m * (kappa - 1) / 2


def min_degree(rho: float, kappa: float, lambda1: float) -> int:
    """Smallest degree giving damping ``E_m <= rho`` and the positivity bound.

    Returns the smallest integer ``m`` with

        m >= max(|log(2 rho / (kappa - 1))|, |log(2 / (lambda1 (kappa - 1)))|) / |log delta|.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    s = math.sqrt(kappa)
    delta = (s - 1) / (s + 1)
    bound = max(abs(math.log(2 * rho / (kappa - 1))),
                abs(math.log(2 / (lambda1 * (kappa - 1))))) / abs(math.log(delta))
    m = math.ceil(bound)
    # guard against ceil of a bound that sits a rounding error above an integer
    if m - bound > 1 - 1e-12:
        m -= 1
    return max(m, 1)


@dataclass(frozen=True)
class PolySmoother:
    """Best-approximation polynomial ``q_m`` on ``[lambda0, lambda1]``.

    Attributes
    ----------
    lambda0, lambda1 : float
        Approximation interval, ``0 < lambda0 < lambda1``.
    degree : int
        Polynomial degree ``m``.
    cheb_coeffs : ndarray
        Coefficients of ``q_m`` in the mapped Chebyshev basis, length ``m + 1``.
    alternation : ndarray
        The ``m + 2`` alternation points of ``1/x - q_m(x)``, ascending.
    level : float
        Uniform error ``max |1/x - q_m(x)|`` found by the exchange.
    """

    lambda0: float
    lambda1: float
    degree: int
    cheb_coeffs: np.ndarray
    alternation: np.ndarray
    level: float

    @property
    def kappa(self) -> float:
        return self.lambda1 / self.lambda0

    @property
    def delta(self) -> float:
        s = math.sqrt(self.kappa)
        return (s - 1) / (s + 1)

    @property
    def Em(self) -> float:
        return error_Em(self.degree, self.kappa)

    def to_t(self, x):
        return (2 * np.asarray(x, dtype=np.float64) - self.lambda1 - self.lambda0) / (
            self.lambda1 - self.lambda0)

    def __call__(self, x):
        """Evaluate ``q_m`` at scalar or array ``x``."""
        return C.chebval(self.to_t(x), self.cheb_coeffs)

    def error(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 1.0 / x - self(x)

    def damping(self, x):
        """``1 - x q_m(x)``, the error-propagation polynomial of the smoother."""
        x = np.asarray(x, dtype=np.float64)
        return 1.0 - x * self(x)


def _cheb_nodes(npts: int, a: float, b: float) -> np.ndarray:
    t = -np.cos(np.pi * np.arange(npts) / (npts - 1))
    return 0.5 * (b - a) * (t + 1) + a


def remez_inverse(lambda0: float, lambda1: float, m: int, tol: float = 1e-12,
                  maxiter: int = 50, nsample: int = 4000):
    """Remez exchange for the best degree-``m`` approximation to ``1/x``.

    Returns ``(coeffs, reference, level)`` with coefficients in the mapped
    Chebyshev basis. Raises :class:`RemezError` when the extremal errors do
    not agree to ``tol`` (relative) within ``maxiter`` exchanges.

    ``1/x - q(x)`` is evaluated with absolute rounding noise of order
    ``eps / lambda0``, so for very small errors the attainable relative
    spread is floored at ``8 eps / (lambda0 * level)``.
    """
    a, b = float(lambda0), float(lambda1)
    to_t = lambda x: (2 * x - b - a) / (b - a)
    signs = (-1.0) ** np.arange(m + 2)
    ref = _cheb_nodes(m + 2, a, b)
    sample = _cheb_nodes(nsample, a, b)
    spread = np.inf
    for _ in range(maxiter):
        V = C.chebvander(to_t(ref), m)
        M = np.column_stack([V, signs])
        sol = np.linalg.solve(M, 1.0 / ref)
        c, h = sol[:-1], sol[-1]
        err = lambda x: 1.0 / x - C.chebval(to_t(x), c)

        # zeros of the error bracket m + 2 monotone sign segments
        es = err(sample)
        sgn = np.sign(es)
        cross = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
        if cross.size != m + 1:
            raise RemezError(f"expected {m + 1} sign changes, found {cross.size}")
        zeros = [brentq(err, sample[i], sample[i + 1], xtol=1e-15 * b, rtol=1e-15)
                 for i in cross]
        edges = [a] + zeros + [b]
        new_ref = np.empty(m + 2)
        for j in range(m + 2):
            lo, hi = edges[j], edges[j + 1]
            s = np.sign(err(0.5 * (lo + hi)))
            cand = [lo, hi] if j in (0, m + 1) else []
            res = minimize_scalar(lambda x: -s * err(x), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-14 * b, "maxiter": 500})
            cand.append(float(res.x))
            vals = [s * err(x) for x in cand]
            new_ref[j] = cand[int(np.argmax(vals))]
        ext = np.abs(err(new_ref))
        spread = (ext.max() - ext.min()) / ext.max()
        ref = new_ref
        floor = 8 * np.finfo(float).eps / (a * ext.max())
        if spread <= max(tol, floor):
            V = C.chebvander(to_t(ref), m)
            sol = np.linalg.solve(np.column_stack([V, signs]), 1.0 / ref)
            return sol[:-1], ref, float(np.abs(err(ref)).max())
    raise RemezError(f"Remez exchange stalled at relative spread {spread:.2e} after {maxiter} steps")


def build(lambda0: float, lambda1: float, m: int, check_positive: bool = True,
          closed_form_rtol: float = 1e-8) -> PolySmoother:
    """Construct ``q_m`` on ``[lambda0, lambda1]``.

    The exchange result is checked against the closed-form error
    ``E_m / lambda1``; disagreement beyond ``closed_form_rtol`` raises
    :class:`RemezError`. With ``check_positive`` a ``ValueError`` is raised
    if ``q_m`` is not positive on ``(0, lambda1]``, in which case a higher
    degree (or a narrower interval) is needed.
    """
    if not 0 < lambda0 < lambda1:
        raise ValueError("need 0 < lambda0 < lambda1")
    if m < 1:
        raise ValueError("degree must be >= 1")
    coeffs, ref, level = remez_inverse(lambda0, lambda1, m)
    expected = error_Em(m, lambda1 / lambda0) / lambda1
    noise = 16 * np.finfo(float).eps / lambda0
    if abs(level - expected) > max(closed_form_rtol * expected, noise):
        raise RemezError(f"exchange level {level:.12g} disagrees with closed form {expected:.12g}")
    s = PolySmoother(float(lambda0), float(lambda1), int(m), coeffs, ref, level)
    if check_positive:
        x = np.linspace(0.0, lambda1, 20001)[1:]
        qmin = float(np.min(s(x)))
        if s(lambda1) <= 0 or qmin <= 0:
            raise ValueError(
                f"q_{m} is not positive on (0, {lambda1:g}] (min {qmin:.3g}, "
                f"q(lambda1) = {float(s(lambda1)):.3g}); increase the degree")
    return s


def apply(s: PolySmoother, A, r) -> np.ndarray:
    """Return ``q_m(A) r`` by Clenshaw's recurrence using exactly ``m`` products with ``A``."""
    r = np.asarray(r, dtype=np.float64)
    if A.shape[1] != r.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, r has length {r.shape[0]}")
    c = s.cheb_coeffs
    alpha = 2.0 / (s.lambda1 - s.lambda0)
    beta = (s.lambda1 + s.lambda0) / (s.lambda1 - s.lambda0)

    def T(v):
        return alpha * (A @ v) - beta * v

    m = c.shape[0] - 1
    b1 = c[m] * r
    if m == 0:
        return b1
    b2 = np.zeros_like(r)
    for j in range(m - 1, 0, -1):
        b1, b2 = c[j] * r + 2.0 * T(b1) - b2, b1
    return c[0] * r + T(b1) - b2


def smoothed_iterate(s: PolySmoother, A, f, y) -> np.ndarray:
    """One smoothing step ``y + q_m(A)(f - A y)``."""
    y = np.asarray(y, dtype=np.float64)
    return y + apply(s, A, f - A @ y)


def write_diagnostics(path, s: PolySmoother) -> None:
    """CSV dump of the Chebyshev coefficients and the alternation points."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "index", "value", "error"])
        for i, c in enumerate(s.cheb_coeffs):
            w.writerow(["coeff", i, repr(float(c)), ""])
        for i, x in enumerate(s.alternation):
            w.writerow(["alternation", i, repr(float(x)), repr(float(s.error(x)))])
