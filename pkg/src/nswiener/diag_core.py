"""
Index windows, block diagonals and the finite-support diagonal expansion.

An operator on l2(Z; C^m) is stored as F = sum_n Z^n F_[n], where Z is the
backward shift (Zf)_i = f_{i+1} and each F_[n] is a block diagonal operator.
The block of F at (row, col) = (i - n, i) is the i-th block of F_[n], so
positive offsets sit above the main diagonal and negative offsets below.

Every Diagonal carries its own column window; blocks outside it are zero.
The operator itself is therefore an honest infinite operator with finitely
many nonzero blocks, and algebra on it is exact. Truncation only happens when
an operator is rendered on a finite window (see ``dense_oracle``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np


@dataclass(frozen=True, order=True)
class IndexWindow:
    """Inclusive range of time indices ``lo..hi``."""

    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise ValueError(f"window bounds must be integers, got {self.lo}, {self.hi}")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @classmethod
    def coerce(cls, w) -> "IndexWindow":
        if isinstance(w, IndexWindow):
            return w
        lo, hi = w
        return cls(lo, hi)

    def __len__(self):
        return self.hi - self.lo + 1

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, i):
        return self.lo <= i <= self.hi

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"

    def shift(self, j: int) -> "IndexWindow":
        return IndexWindow(self.lo + j, self.hi + j)

    def union(self, other: "IndexWindow") -> "IndexWindow":
        # convex hull; gaps are zero-filled by the callers
        return IndexWindow(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "IndexWindow") -> "IndexWindow | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return IndexWindow(lo, hi) if lo <= hi else None

    def expand(self, k: int) -> "IndexWindow":
        return IndexWindow(self.lo - k, self.hi + k)

    def shrink(self, k: int) -> "IndexWindow | None":
        lo, hi = self.lo + k, self.hi - k
        return IndexWindow(lo, hi) if lo <= hi else None

    def covers(self, other: "IndexWindow") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def _as_blocks(blocks, m=None) -> np.ndarray:
    """Coerce scalars / (L,) / (L, m, m) input to a complex (L, m, m) array."""
    arr = np.asarray(blocks, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None, None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"blocks must have shape (L, m, m), got {arr.shape}")
    if arr.shape[1] < 1:
        raise ValueError("block size must be at least 1")
    if m is not None and arr.shape[1] != m:
        raise ValueError(f"block size {arr.shape[1]} does not match m={m}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("blocks contain NaN or Inf")
    return arr


class Diagonal:
    """A block diagonal operator D with D_ii = blocks[i - lo] on its window.

    Instances are immutable; the block array is marked read-only.
    """

    __slots__ = ("window", "blocks")

    def __init__(self, window, blocks, m=None):
        window = IndexWindow.coerce(window)
        arr = _as_blocks(blocks, m).copy()
        if arr.shape[0] != len(window):
            raise ValueError(
                f"{arr.shape[0]} blocks given for window {window} of length {len(window)}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "blocks", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Diagonal is immutable")

    @classmethod
    def _wrap(cls, window, arr):
        # trusted fast path: arr already complex (L, m, m) and owned
        obj = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(obj, "window", window)
        object.__setattr__(obj, "blocks", arr)
        return obj

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    def __repr__(self):
        return f"Diagonal(window={self.window}, m={self.m})"

    def block(self, i: int) -> np.ndarray:
        if i in self.window:
            return self.blocks[i - self.window.lo]
        return np.zeros((self.m, self.m), dtype=complex)

    def on(self, window: IndexWindow) -> np.ndarray:
        """Blocks over ``window`` with zero fill outside the stored range."""
        out = np.zeros((len(window), self.m, self.m), dtype=complex)
        common = self.window.intersect(window)
        if common is not None:
            out[common.lo - window.lo:common.hi - window.lo + 1] = \
                self.blocks[common.lo - self.window.lo:common.hi - self.window.lo + 1]
        return out

    def shifted(self, j: int) -> "Diagonal":
        """D^(j) = Z^{*j} D Z^j: the block at column i moves to column i + j."""
        return Diagonal._wrap(self.window.shift(j), self.blocks.copy())

    def adjoint_blocks(self) -> "Diagonal":
        return Diagonal._wrap(self.window, np.conj(np.swapaxes(self.blocks, 1, 2)))

    def scaled(self, c) -> "Diagonal":
        return Diagonal._wrap(self.window, self.blocks * c)

    def block_norms(self) -> np.ndarray:
        return np.linalg.norm(self.blocks, ord=2, axis=(1, 2))

    def norm(self) -> float:
        """Operator norm of the diagonal operator: sup of block spectral norms."""
        return float(self.block_norms().max())

    def hs_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.blocks) ** 2))

    def is_zero(self) -> bool:
        return not np.any(self.blocks)


_DEFAULT = object()


class NSOperator:
    """Finite-support diagonal expansion F = sum_n Z^n F_[n] with m x m blocks.

    ``diagonals`` maps offset n to the Diagonal F_[n]. ``window`` is the
    operator's nominal index window; it always covers every diagonal's
    column window and is what ``render`` uses when no window is given.
    ``exact_interior`` records where the stored blocks are trusted to match
    the untruncated operator this one approximates (None: nowhere).
    """

    __slots__ = ("m", "diagonals", "window", "exact_interior")

    def __init__(self, m: int, diagonals: Mapping[int, Diagonal] | None = None,
                 window=None, exact_interior=_DEFAULT):
        if int(m) != m or m < 1:
            raise ValueError(f"block size must be a positive integer, got {m}")
        m = int(m)
        diags = {}
        for n, d in (diagonals or {}).items():
            if int(n) != n:
                raise ValueError(f"offset must be an integer, got {n!r}")
            if not isinstance(d, Diagonal):
                raise TypeError(f"diagonal {n} is not a Diagonal")
            if d.m != m:
                raise ValueError(f"diagonal {n} has block size {d.m}, expected {m}")
            diags[int(n)] = d
        hull = None
        for d in diags.values():
            hull = d.window if hull is None else hull.union(d.window)
        if window is None:
            if hull is None:
                raise ValueError("an operator without diagonals needs an explicit window")
            window = hull
        else:
            window = IndexWindow.coerce(window)
            if hull is not None:
                window = window.union(hull)
        if exact_interior is _DEFAULT:
            exact_interior = window
        elif exact_interior is not None:
            exact_interior = IndexWindow.coerce(exact_interior)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "diagonals", dict(sorted(diags.items())))
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "exact_interior", exact_interior)

    def __setattr__(self, name, value):
        raise AttributeError("NSOperator is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_arrays(cls, window, diagonals: Mapping[int, object], m=None,
                    exact_interior=_DEFAULT) -> "NSOperator":
        """Build from ``{offset: blocks}`` where every block array spans ``window``.

        Blocks may be given as scalars per index (m = 1) or as (L, m, m) arrays.
        """
        window = IndexWindow.coerce(window)
        diags = {}
        for n, blocks in diagonals.items():
            d = Diagonal(window, blocks, m)
            m = d.m
            diags[n] = d
        if m is None:
            raise ValueError("cannot infer block size from an empty diagonal map")
        return cls(m, diags, window, exact_interior)

    @classmethod
    def stationary(cls, window, coefficients: Mapping[int, object]) -> "NSOperator":
        """Section over ``window`` of the operator with constant n-th diagonal ``coefficients[n]``.

        Only blocks with both row and column inside the window are kept, so a
        Hermitian coefficient family gives a self-adjoint operator.
        """
        window = IndexWindow.coerce(window)
        arrays = {}
        for n, c in coefficients.items():
            c = np.atleast_2d(np.asarray(c, dtype=complex))
            arrays[n] = np.broadcast_to(c, (len(window),) + c.shape)
        return restrict(cls.from_arrays(window, arrays), window)

    # -- structure ------------------------------------------------------

    @property
    def support(self) -> list[int]:
        return list(self.diagonals)

    @property
    def nonzero_support(self) -> list[int]:
        return [n for n, d in self.diagonals.items() if not d.is_zero()]

    @property
    def radius(self) -> int:
        """Largest |offset| carrying a nonzero diagonal."""
        return max((abs(n) for n in self.nonzero_support), default=0)

    @property
    def is_upper(self) -> bool:
        return all(n >= 0 for n in self.nonzero_support)

    @property
    def is_lower(self) -> bool:
        return all(n <= 0 for n in self.nonzero_support)

    @property
    def is_diagonal(self) -> bool:
        return all(n == 0 for n in self.nonzero_support)

    def diagonal(self, n: int) -> Diagonal | None:
        return self.diagonals.get(n)

    def blocks_on(self, n: int, window=None) -> np.ndarray:
        """Blocks of F_[n] over ``window`` (default: the operator window), zero-filled."""
        window = self.window if window is None else IndexWindow.coerce(window)
        d = self.diagonals.get(n)
        if d is None:
            return np.zeros((len(window), self.m, self.m), dtype=complex)
        return d.on(window)

    def entry(self, row: int, col: int) -> np.ndarray:
        return get_entry(self, row, col)

    def with_meta(self, window=None, exact_interior=_DEFAULT) -> "NSOperator":
        return NSOperator(self.m, self.diagonals,
                          self.window if window is None else window,
                          self.exact_interior if exact_interior is _DEFAULT else exact_interior)

    def pruned(self) -> "NSOperator":
        """Drop diagonals whose blocks are identically zero."""
        keep = {n: d for n, d in self.diagonals.items() if not d.is_zero()}
        return NSOperator(self.m, keep, self.window, self.exact_interior)

    def __repr__(self):
        return (f"NSOperator(m={self.m}, support={self.support}, window={self.window}, "
                f"exact_interior={self.exact_interior})")

    # -- arithmetic sugar (implemented in ``algebra``) ------------------

    def __add__(self, other):
        from .algebra import add
        return add(self, other)

    def __sub__(self, other):
        from .algebra import add
        return add(self, other.scale(-1))

    def __neg__(self):
        return self.scale(-1)

    def __matmul__(self, other):
        from .algebra import multiply
        return multiply(self, other)

    def __mul__(self, c):
        if isinstance(c, NSOperator):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def scale(self, c) -> "NSOperator":
        return NSOperator(self.m, {n: d.scaled(c) for n, d in self.diagonals.items()},
                          self.window, self.exact_interior)

    @property
    def H(self) -> "NSOperator":
        from .algebra import adjoint
        return adjoint(self)


def zero(m: int, window) -> NSOperator:
    """The zero operator with nominal window ``window``."""
    return NSOperator(m, {}, IndexWindow.coerce(window))


def identity(m: int, window) -> NSOperator:
    """Identity blocks on ``window``, zero elsewhere."""
    window = IndexWindow.coerce(window)
    eye = np.broadcast_to(np.eye(m, dtype=complex), (len(window), m, m))
    return NSOperator(m, {0: Diagonal(window, eye)}, window)


def shift(m: int, window, power: int = 1) -> NSOperator:
    """Z^power restricted to the columns in ``window`` (Z^power times identity)."""
    window = IndexWindow.coerce(window)
    eye = np.broadcast_to(np.eye(m, dtype=complex), (len(window), m, m))
    return NSOperator(m, {power: Diagonal(window, eye)}, window)


def get_entry(F: NSOperator, row: int, col: int) -> np.ndarray:
    """The (row, col) block of F, i.e. block ``col`` of F_[col - row]."""
    d = F.diagonals.get(col - row)
    if d is None:
        return np.zeros((F.m, F.m), dtype=complex)
    return d.block(col).copy()


def shift_conjugate(F: NSOperator, j: int) -> NSOperator:
    """F^(j) = Z^{*j} F Z^j, whose (s, t) block is F's (s - j, t - j) block."""
    if j == 0:
        return F
    interior = None if F.exact_interior is None else F.exact_interior.shift(j)
    return NSOperator(F.m, {n: d.shifted(j) for n, d in F.diagonals.items()},
                      F.window.shift(j), interior)


def restrict(F: NSOperator, window) -> NSOperator:
    """Keep only the blocks whose row and column both lie in ``window``."""
    window = IndexWindow.coerce(window)
    out = {}
    for n, d in F.diagonals.items():
        # column i survives iff i and i - n are both in window
        cols = IndexWindow(window.lo + max(n, 0), window.hi + min(n, 0)) \
            if window.lo + max(n, 0) <= window.hi + min(n, 0) else None
        if cols is None:
            continue
        common = cols.intersect(d.window)
        if common is None:
            continue
        out[n] = Diagonal._wrap(common, d.on(common))
    interior = None if F.exact_interior is None else F.exact_interior.intersect(window)
    return NSOperator(F.m, out, window, interior)


def extend_edges(F: NSOperator, window) -> NSOperator:
    """Section of F over ``window``, continuing each diagonal by its edge blocks.

    Diagonal n is defined on the columns i with i and i - n in the window;
    columns beyond the stored range (counting only blocks whose row lies in
    F's window) repeat the nearest stored block. This is
    exact for stationary operators and keeps a self-adjoint section
    self-adjoint, since the adjoint rule pairs the clamped ranges of n and -n.
    """
    window = IndexWindow.coerce(window)
    out = {}
    for n, d in F.diagonals.items():
        lo, hi = window.lo + max(n, 0), window.hi + min(n, 0)
        if lo > hi:
            continue
        # stored columns whose row also lies in F's window
        src = d.window.intersect(
            IndexWindow(F.window.lo + max(n, 0), max(F.window.lo + max(n, 0), F.window.hi + min(n, 0))))
        if src is None:
            continue
        idx = np.clip(np.arange(lo, hi + 1), src.lo, src.hi) - d.window.lo
        out[n] = Diagonal._wrap(IndexWindow(lo, hi), d.blocks[idx].copy())
    return NSOperator(F.m, out, window)


def max_abs_diff(F: NSOperator, G: NSOperator, window=None) -> float:
    """Largest entrywise |F - G| over all blocks (or those with columns in ``window``)."""
    if F.m != G.m:
        raise ValueError(f"block size mismatch: {F.m} vs {G.m}")
    worst = 0.0
    for n in set(F.diagonals) | set(G.diagonals):
        hull = None
        for d in (F.diagonals.get(n), G.diagonals.get(n)):
            if d is not None:
                hull = d.window if hull is None else hull.union(d.window)
        if window is not None:
            hull = hull.intersect(IndexWindow.coerce(window))
            if hull is None:
                continue
        diff = F.blocks_on(n, hull) - G.blocks_on(n, hull)
        if diff.size:
            worst = max(worst, float(np.abs(diff).max()))
    return worst


def allclose(F: NSOperator, G: NSOperator, atol: float = 1e-12, window=None) -> bool:
    return max_abs_diff(F, G, window) <= atol
