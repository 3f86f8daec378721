"""
The best-approximation smoother
===============================

The smoother is the polynomial ``q_m`` that best approximates ``1/x`` in the
uniform norm on ``[lambda1 / kappa, lambda1]``. Its error-propagation
polynomial ``1 - x q_m(x)`` is bounded by a closed form, so the damping of
one smoothing step is known before anything is run.
"""

import numpy as np

from uaamli import polynomial as poly

# Build q_4 on [0.1, 1] (kappa = 10) and compare the sampled damping factor
# with the closed form delta^m (kappa - 1) / 2.
s = poly.build(0.1, 1.0, 4)
x = np.linspace(0.1, 1.0, 100_000)
print(f"measured max |1 - x q_4(x)| = {np.abs(s.damping(x)).max():.7f}")
print(f"closed form E_4             = {s.Em:.7f}")

# The error 1/x - q_m(x) equioscillates: m + 2 points of equal magnitude and
# alternating sign, the right end point among them.
for xi, ei in zip(s.alternation, s.error(s.alternation)):
    print(f"  x = {xi:.6f}   1/x - q(x) = {ei:+.6e}")

# Damping improves geometrically with the degree.
print("\n m   E_m(kappa=10)")
for m in range(1, 9):
    print(f"{m:2d}   {poly.error_Em(m, 10):.4f}")

# The degree rule picks the smallest m with E_m <= rho (and q_m positive
# when the operator is scaled to lambda1 = 1).
print("\nmin_degree(rho=0.5, kappa=10, lambda1=1) =", poly.min_degree(0.5, 10, 1.0))

# Low degrees on wide intervals can make q_m negative near lambda1; build
# refuses those, because the smoother must be SPD.
try:
    poly.build(0.01, 1.0, 1)
except ValueError as exc:
    print("\nrejected:", exc)
