"""Random operator families used by the tests and demos."""
from __future__ import annotations

import numpy as np

from .algebra import adjoint, multiply
from .diag_core import Diagonal, IndexWindow, NSOperator, restrict


def random_blocks(rng, L, m, scale=1.0, real=False):
    a = rng.standard_normal((L, m, m))
    if not real:
        a = a + 1j * rng.standard_normal((L, m, m))
    return scale * a


def random_operator(rng, m, window, offsets, scale=1.0) -> NSOperator:
    """Random complex blocks on every column of ``window`` for each offset."""
    window = IndexWindow.coerce(window)
    diags = {n: Diagonal(window, random_blocks(rng, len(window), m, scale)) for n in offsets}
    return NSOperator(m, diags, window)


def _unitary(rng, L, m):
    q, r = np.linalg.qr(random_blocks(rng, L, m))
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def random_outer_factor(rng, m, window, b, sigma_min=0.5, sigma_max=1.5,
                        mass=0.4) -> NSOperator:
    """Upper U with U_[0] blocks of singular values in [sigma_min, sigma_max]
    and off-diagonal Wiener mass sum_{n>=1} ||U_[n]|| equal to ``mass``.

    With mass < sigma_min, U_[0]^{-1} (U - U_[0]) has norm below one, so U is
    boundedly invertible in the upper-triangular Wiener algebra.
    """
    window = IndexWindow.coerce(window)
    L = len(window)
    s = rng.uniform(sigma_min, sigma_max, size=(L, m))
    u0 = _unitary(rng, L, m) * s[:, None, :] @ np.conj(np.swapaxes(_unitary(rng, L, m), 1, 2))
    diags = {0: Diagonal(window, u0)}
    if b > 0:
        share = rng.dirichlet(np.ones(b)) * mass
        for n in range(1, b + 1):
            blk = random_blocks(rng, L, m)
            blk /= np.linalg.norm(blk, ord=2, axis=(1, 2)).max()
            diags[n] = Diagonal(window, blk * share[n - 1])
    return NSOperator(m, diags, window)


def gram_section(U: NSOperator, window=None) -> NSOperator:
    """Section of U* U over ``window`` (default U's window).

    Blocks of U* U with both indices inside U's column window are exact for
    any extension of U beyond its window to the past or future.
    """
    window = U.window if window is None else IndexWindow.coerce(window)
    return restrict(multiply(adjoint(U), U), window)
