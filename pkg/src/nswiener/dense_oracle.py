"""
Dense finite sections of diagonal expansions, plus the brute-force linear
algebra used both as a test oracle and as the factorization kernel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diag_core import Diagonal, IndexWindow, NSOperator

DELTA_PD = 1e-10
HERMITIAN_TOL = 1e-10


class WindowTooSmallError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    def __init__(self, msg, index=None, pivot=None):
        super().__init__(msg)
        self.index = index
        self.pivot = pivot


class SingularBlockError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DenseTruncation:
    """Block matrix of an operator over ``window``.

    ``data[(i - lo) * m + a, (j - lo) * m + b]`` is entry (a, b) of block (i, j).
    """

    window: IndexWindow
    m: int
    data: np.ndarray
    exact_interior: IndexWindow | None = None

    def __post_init__(self):
        n = len(self.window) * self.m
        if self.data.shape != (n, n):
            raise ValueError(f"data has shape {self.data.shape}, expected {(n, n)}")
        if self.exact_interior is None:
            object.__setattr__(self, "exact_interior", self.window)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def slice_of(self, window) -> slice:
        window = IndexWindow.coerce(window)
        if not self.window.covers(window):
            raise WindowTooSmallError(f"{window} is not inside {self.window}")
        return slice((window.lo - self.window.lo) * self.m, (window.hi - self.window.lo + 1) * self.m)

    def sub(self, window) -> "DenseTruncation":
        """Principal sub-block over a sub-window."""
        window = IndexWindow.coerce(window)
        s = self.slice_of(window)
        interior = self.exact_interior.intersect(window) if self.exact_interior else None
        return DenseTruncation(window, self.m, self.data[s, s].copy(), interior or window)

    def block(self, i: int, j: int) -> np.ndarray:
        lo, m = self.window.lo, self.m
        return self.data[(i - lo) * m:(i - lo + 1) * m, (j - lo) * m:(j - lo + 1) * m]

    def hermitian_part(self) -> "DenseTruncation":
        return DenseTruncation(self.window, self.m, 0.5 * (self.data + self.data.conj().T),
                               self.exact_interior)

    def with_data(self, data) -> "DenseTruncation":
        return DenseTruncation(self.window, self.m, np.asarray(data, dtype=complex),
                               self.exact_interior)


def support_window(F: NSOperator) -> IndexWindow:
    """Smallest window holding every row and column of a nonzero block of F."""
    w = None
    for n, d in F.diagonals.items():
        if d.is_zero():
            continue
        cw = d.window.union(d.window.shift(-n))
        w = cw if w is None else w.union(cw)
    return F.window if w is None else w


def render(F: NSOperator, window=None, check: bool = True) -> DenseTruncation:
    """Dense image of F over ``window`` (default: F's nominal window).

    With ``check`` set, every nonzero diagonal's column range must lie inside
    the window; blocks whose row falls outside are the truncation itself.
    """
    window = F.window if window is None else IndexWindow.coerce(window)
    if check:
        for n, d in F.diagonals.items():
            if not window.covers(d.window) and not d.is_zero():
                raise WindowTooSmallError(
                    f"window {window} does not cover diagonal {n} on {d.window}")
    m, L = F.m, len(window)
    data4 = np.zeros((L, m, L, m), dtype=complex)
    for n, d in F.diagonals.items():
        cols = IndexWindow(window.lo + max(n, 0), window.hi + min(n, 0)) \
            if window.lo + max(n, 0) <= window.hi + min(n, 0) else None
        if cols is None:
            continue
        cols = cols.intersect(d.window)
        if cols is None:
            continue
        c = np.arange(cols.lo, cols.hi + 1) - window.lo
        data4[c - n, :, c, :] = d.blocks[cols.lo - d.window.lo:cols.hi - d.window.lo + 1]
    return DenseTruncation(window, m, data4.reshape(L * m, L * m))


def extract_diagonals(T: DenseTruncation, keep_zero: bool = False) -> NSOperator:
    """Read diagonal n of T from its (i - n, i) blocks."""
    m, L, lo = T.m, len(T.window), T.window.lo
    data4 = T.data.reshape(L, m, L, m)
    diags = {}
    for n in range(-(L - 1), L):
        c = np.arange(max(n, 0), L + min(n, 0))
        blocks = data4[c - n, :, c, :]
        if not keep_zero and not np.any(blocks):
            continue
        w = IndexWindow(lo + c[0], lo + c[-1])
        diags[n] = Diagonal._wrap(w, np.ascontiguousarray(blocks))
    return NSOperator(m, diags, T.window, T.exact_interior)


def half_bandwidth(A: np.ndarray) -> int:
    """Largest |i - j| with A[i, j] != 0 (scalar entries)."""
    i, j = np.nonzero(A)
    return int(np.abs(i - j).max()) if i.size else 0


def check_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    dev = float(np.abs(A - A.conj().T).max()) if A.size else 0.0
    if dev > tol * max(1.0, float(np.abs(A).max())):
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return dev


def _cholesky_upper_array(A: np.ndarray, delta: float) -> np.ndarray:
    """Band-limited upper Cholesky A = R* R. Raises on a pivot <= delta."""
    A = np.array(A, dtype=complex)
    N = A.shape[0]
    bw = half_bandwidth(A)
    R = np.zeros_like(A)
    for k in range(N):
        pivot = A[k, k].real
        if not pivot > delta:
            raise NotPositiveDefiniteError(
                f"not positive definite on this window (pivot {pivot:.3e} at row {k})",
                index=k, pivot=pivot)
        e = min(N, k + bw + 1)
        rkk = np.sqrt(pivot)
        R[k, k] = rkk
        row = A[k, k + 1:e] / rkk
        R[k, k + 1:e] = row
        if e > k + 1:
            A[k + 1:e, k + 1:e] -= np.outer(row.conj(), row)
    return R


def cholesky_upper(T: DenseTruncation, delta: float = DELTA_PD) -> DenseTruncation:
    """Upper-triangular R with positive diagonal and R* R = T.

    Elimination stays inside the half-bandwidth of T, so banded input gives
    a factor with the same band.
    """
    check_hermitian(T.data)
    return T.with_data(_cholesky_upper_array(T.data, delta))


def triangular_solve_upper(R: DenseTruncation | np.ndarray, B: np.ndarray, m: int | None = None) -> np.ndarray:
    """Solve R X = B for block upper-triangular R by block back substitution."""
    if isinstance(R, DenseTruncation):
        m, R = R.m, R.data
    m = 1 if m is None else m
    R = np.asarray(R)
    B = np.asarray(B, dtype=complex)
    vec = B.ndim == 1
    X = (B[:, None] if vec else B).astype(complex, copy=True)
    N = R.shape[0]
    if N % m:
        raise ValueError(f"matrix size {N} is not a multiple of block size {m}")
    scale = float(np.abs(R).max()) if R.size else 1.0
    for k in range(N // m - 1, -1, -1):
        s = slice(k * m, (k + 1) * m)
        rhs = X[s] - R[s, (k + 1) * m:] @ X[(k + 1) * m:]
        D = R[s, s]
        smin = np.linalg.svd(D, compute_uv=False).min()
        if smin <= 1e-14 * max(scale, 1.0):
            raise SingularBlockError(f"singular diagonal block at block row {k}")
        X[s] = np.linalg.solve(D, rhs)
    return X[:, 0] if vec else X


def _succeeds(A, delta):
    try:
        _cholesky_upper_array(A, delta)
        return True
    except NotPositiveDefiniteError:
        return False


def min_eig_lower_bound(T: DenseTruncation | np.ndarray, tol: float = 1e-8,
                        delta: float = DELTA_PD) -> float:
    """Largest shift lam (to within ``tol``) with T - lam I Cholesky-factorable.

    The bracket does not depend on ``tol``, so the bisection path for a
    smaller tolerance extends the path for a larger one and the returned
    bound can only grow.
    """
    A = T.data if isinstance(T, DenseTruncation) else np.asarray(T, dtype=complex)
    check_hermitian(A)
    A = 0.5 * (A + A.conj().T)
    d = A.diagonal().real
    radii = np.abs(A).sum(axis=1) - np.abs(A.diagonal())
    hi = float(d.min())
    lo = float((d - radii).min()) - 1.0 - delta
    eye = np.eye(A.shape[0])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _succeeds(A - mid * eye, delta):
            lo = mid
        else:
            hi = mid
    return lo
