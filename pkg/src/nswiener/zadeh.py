"""Zadeh transform F(z) = sum_n z^n Z^n F_[n] and the identities it satisfies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import multiply, wiener_norm
from .dense_oracle import DenseTruncation, render
from .diag_core import IndexWindow, NSOperator, max_abs_diff

CIRCLE_TOL = 1e-12


class DomainError(ValueError):
    """z lies outside the region where the transform is defined for this operator."""


def lambda_exponent(k: int) -> int:
    """Power of z in the k-th entry of Lambda(z) = diag(..., z^2, z, 1, 1/z, 1/z^2, ...)."""
    return -k


@dataclass(frozen=True, eq=False)
class ZadehEvaluation:
    z: complex
    result: NSOperator
    dense: DenseTruncation


def _check_z(F: NSOperator, z: complex):
    a = abs(z)
    if a > 1 + CIRCLE_TOL:
        raise DomainError(f"|z| = {a:.6g} > 1")
    if not F.is_upper and abs(a - 1) > CIRCLE_TOL:
        raise DomainError(
            f"operator has lower diagonals; the bilateral transform needs |z| = 1, got |z| = {a:.6g}")


def scale_diagonals(F: NSOperator, z: complex) -> NSOperator:
    """Multiply diagonal n by z^n (no domain check)."""
    return NSOperator(F.m, {n: d.scaled(complex(z) ** n) for n, d in F.diagonals.items()},
                      F.window, F.exact_interior)


def zadeh_eval(F: NSOperator, z: complex) -> ZadehEvaluation:
    """Evaluate F(z); upper operators on the closed disk, any operator on the circle."""
    z = complex(z)
    _check_z(F, z)
    result = scale_diagonals(F, z)
    return ZadehEvaluation(z, result, render(result, F.window, check=False))


def zadeh_multiplicativity_check(U1: NSOperator, U2: NSOperator, z: complex) -> float:
    """Residual of (U1 U2)(z) = U1(z) U2(z).

    Two routes are compared against the left side: the diagonal product of
    the evaluated factors, and the product of their dense renderings on the
    rows and columns where that product is untouched by truncation.
    """
    z = complex(z)
    lhs = zadeh_eval(multiply(U1, U2), z).result
    e1, e2 = zadeh_eval(U1, z), zadeh_eval(U2, z)
    rhs = multiply(e1.result, e2.result)
    res = max_abs_diff(lhs, rhs)

    window = U1.window.union(U2.window).expand(U1.radius + U2.radius)
    interior = window.shrink(U1.radius)
    A = render(e1.result, window, check=False).data
    B = render(e2.result, window, check=False).data
    C = render(lhs, window, check=False)
    if interior is not None:
        s = C.slice_of(interior)
        res = max(res, float(np.abs((A @ B)[s, s] - C.data[s, s]).max()))
    return res


def lambda_matrix(window: IndexWindow, m: int, z: complex) -> np.ndarray:
    k = np.arange(window.lo, window.hi + 1)
    return np.repeat(complex(z) ** lambda_exponent(k).astype(float), m)


def lambda_conjugation_check(F: NSOperator, t: float, window=None) -> float:
    """Residual of F(e^{it}) = Lambda(e^{it}) F Lambda(e^{it})^{-1} on dense renderings."""
    window = F.window if window is None else IndexWindow.coerce(window)
    z = np.exp(1j * t)
    # (Lambda A Lambda^{-1})_{jk} = z^(e_j - e_k) A_{jk}; exponent differences
    # keep the diagonal untouched exactly
    e = np.repeat(lambda_exponent(np.arange(window.lo, window.hi + 1)), F.m)
    A = render(F, window, check=False).data
    conj = z ** (e[:, None] - e[None, :]).astype(float) * A
    B = render(zadeh_eval(F, z).result, window, check=False).data
    return float(np.abs(conj - B).max()) if A.size else 0.0


def radial_limit_bound(U: NSOperator, r: float, t: float) -> tuple[float, float]:
    """Wiener distance between U(re^{it}) and U(e^{it}), and its majorant.

    The majorant is sum_n (1 - r^n) ||U_[n]||.
    """
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if not U.is_upper:
        raise DomainError("radial limits are defined for upper-triangular operators")
    inner = zadeh_eval(U, r * np.exp(1j * t)).result
    edge = zadeh_eval(U, np.exp(1j * t)).result
    actual = wiener_norm(inner - edge)
    bound = float(sum((1 - r ** n) * d.norm() for n, d in U.diagonals.items()))
    if actual > bound * (1 + 1e-12) + 1e-15:
        raise ArithmeticError(f"radial bound violated: {actual!r} > {bound!r}")
    return actual, bound
