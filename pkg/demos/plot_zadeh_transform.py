"""
Evaluating an operator at a point of the disk
=============================================

Scaling diagonal ``n`` by ``z**n`` turns an upper-triangular operator into an
analytic family ``U(z)``. Products are respected, and on the unit circle the
scaling is just conjugation by a diagonal unitary.
"""

import numpy as np

from nswiener import (IndexWindow, lambda_conjugation_check, radial_limit_bound,
                      wiener_norm, zadeh_eval, zadeh_multiplicativity_check)
from nswiener.sampling import random_operator

rng = np.random.default_rng(1)
w = IndexWindow(0, 11)
U1 = random_operator(rng, 2, w, range(0, 3))
U2 = random_operator(rng, 2, w, range(0, 2))

###############################################################################
# Multiplicativity at an interior point
z = 0.3 + 0.4j
print("(U1 U2)(z) vs U1(z) U2(z):", zadeh_multiplicativity_check(U1, U2, z))

###############################################################################
# The Wiener norm can only shrink inside the disk
for r in (0.0, 0.5, 0.9, 1.0):
    print(f"r={r:.1f}  ||U1(r)||_W = {wiener_norm(zadeh_eval(U1, r).result):.4f}")

###############################################################################
# On the circle the transform is conjugation by Lambda = diag(z^-k)
F = random_operator(rng, 1, w, range(-2, 3))
print("Lambda conjugation residual:", lambda_conjugation_check(F, 1.1))

###############################################################################
# Radial limits: the distance to the boundary value is controlled diagonal
# by diagonal, sum_n (1 - r^n) ||U_[n]||
for r in (0.9, 0.99, 0.999):
    actual, bound = radial_limit_bound(U1, r, 2.0)
    print(f"r={r}: distance {actual:.3e}  majorant {bound:.3e}")
