"""
Banach-algebra operations on diagonal expansions.

Products use the diagonal convolution law

    (FG)_[k] = sum_n F_[n]^(k-n) G_[k-n],

which is exact for finite-support operators: the block of FG at column i on
offset k collects F's block at column i - p (p = k - n) times G's block at i.
"""
from __future__ import annotations

import os
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .diag_core import Diagonal, IndexWindow, NSOperator, max_abs_diff


class BlockSizeError(ValueError):
    """Operands have different block sizes."""


class NotSelfAdjointError(ValueError):
    pass


def _check_m(F, G):
    if F.m != G.m:
        raise BlockSizeError(f"block size mismatch: {F.m} vs {G.m}")


def _sum_pieces(m, pieces):
    """Sum (window, blocks) pieces into one Diagonal over their hull."""
    hull = pieces[0][0]
    for w, _ in pieces[1:]:
        hull = hull.union(w)
    out = np.zeros((len(hull), m, m), dtype=complex)
    for w, arr in pieces:
        out[w.lo - hull.lo:w.hi - hull.lo + 1] += arr
    return Diagonal._wrap(hull, out)


def _interior(*ops, radius=0):
    cur = None
    for i, op in enumerate(ops):
        if op.exact_interior is None:
            return None
        cur = op.exact_interior if i == 0 else cur.intersect(op.exact_interior)
        if cur is None:
            return None
    return cur.shrink(radius)


def add(F: NSOperator, G: NSOperator) -> NSOperator:
    """F + G, diagonal by diagonal over the union of supports and windows."""
    _check_m(F, G)
    pieces = defaultdict(list)
    for op in (F, G):
        for n, d in op.diagonals.items():
            pieces[n].append((d.window, d.blocks))
    diags = {n: _sum_pieces(F.m, p) for n, p in pieces.items()}
    return NSOperator(F.m, diags, F.window.union(G.window), _interior(F, G))


def multiply(F: NSOperator, G: NSOperator) -> NSOperator:
    """Product FG via the diagonal convolution law, summed in ascending offset order.

    The result is exact as an operator. Its ``exact_interior`` is the common
    exact interior of the factors shrunk by the larger support radius, which
    is where a product of finite renderings agrees with the true product.
    """
    _check_m(F, G)
    pieces = defaultdict(list)
    for n, fd in F.diagonals.items():
        for p, gd in G.diagonals.items():
            # column i of the term needs F_[n] at i - p and G_[p] at i
            w = gd.window.intersect(fd.window.shift(p))
            if w is None:
                continue
            f = fd.blocks[w.lo - p - fd.window.lo:w.hi - p - fd.window.lo + 1]
            g = gd.blocks[w.lo - gd.window.lo:w.hi - gd.window.lo + 1]
            pieces[n + p].append((w, f @ g))
    diags = {k: _sum_pieces(F.m, pieces[k]) for k in sorted(pieces)}
    radius = max(F.radius, G.radius)
    return NSOperator(F.m, diags, F.window.union(G.window), _interior(F, G, radius=radius))


def adjoint(F: NSOperator) -> NSOperator:
    """F*, using (F*)_[-n] = ((F_[n])*)^(-n)."""
    diags = {-n: d.adjoint_blocks().shifted(-n) for n, d in F.diagonals.items()}
    return NSOperator(F.m, diags, F.window, F.exact_interior)


def is_self_adjoint(F: NSOperator, tol: float = 1e-12) -> bool:
    return max_abs_diff(F, adjoint(F)) <= tol


def real_part(F: NSOperator) -> NSOperator:
    """Re F = (F + F*) / 2."""
    return add(F, adjoint(F)).scale(0.5)


def phi_of(W: NSOperator, tol: float = 1e-12) -> NSOperator:
    """Upper-triangular Phi = W_[0] + 2 sum_{n>=1} Z^n W_[n], so that Re Phi = W."""
    if not is_self_adjoint(W, tol):
        raise NotSelfAdjointError(
            f"W is not self-adjoint (max |W - W*| = {max_abs_diff(W, adjoint(W)):.3e})")
    diags = {}
    for n, d in W.diagonals.items():
        if n == 0:
            diags[0] = d
        elif n > 0:
            diags[n] = d.scaled(2.0)
    return NSOperator(W.m, diags, W.window, W.exact_interior)


@dataclass(frozen=True)
class NormReport:
    wiener: float
    hilbert_schmidt: float
    operator_norm_estimate: float

    def as_dict(self):
        return {"wiener": self.wiener, "hilbert_schmidt": self.hilbert_schmidt,
                "operator_norm_estimate": self.operator_norm_estimate}


def wiener_norm(F: NSOperator) -> float:
    """sum_n ||F_[n]||, each diagonal measured by its largest block spectral norm."""
    return float(sum(d.norm() for d in F.diagonals.values()))


def hilbert_schmidt_norm(F: NSOperator) -> float:
    return float(np.sqrt(sum(d.hs_norm_sq() for d in F.diagonals.values())))


def default_seed() -> int:
    return int(os.environ.get("NSWIENER_SEED", "0"))


def power_norm(A: np.ndarray, maxiter: int = 200, rtol: float = 1e-12, seed=None) -> float:
    """Largest singular value of A by power iteration on A*A.

    Starts from a seeded random vector, so the result is a lower bound on the
    true norm and deterministic for a given seed.
    """
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    x = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(maxiter):
        y = A.conj().T @ (A @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = np.sqrt(ny)
        x = y / ny
        if abs(new - sigma) <= rtol * new:
            sigma = new
            break
        sigma = new
    return float(np.linalg.norm(A @ x))


def norms(F: NSOperator, window=None) -> NormReport:
    """Wiener, Hilbert-Schmidt and (dense, power-iteration) operator norm of F.

    The operator norm is estimated on the rendering over ``window``
    (default: the smallest window holding every nonzero block).
    """
    from .dense_oracle import render, support_window
    if window is None:
        window = support_window(F)
    T = render(F, window, check=False)
    return NormReport(wiener_norm(F), hilbert_schmidt_norm(F), power_norm(T.data))


def gram_diagonals(V: NSOperator, U: NSOperator, r: float = 1.0) -> NSOperator:
    """Diagonals of Omega(r) = V(r)* U(r) for upper-triangular V and U.

    For m >= 0,
        Omega_[m](r) = sum_{p >= m} r^(2p-m) ((V_[p-m])*)^(m) U_[p],
    and the same expression with p >= 0 gives the negative offsets. When
    V == U this reduces to Omega_[-m] = ((Omega_[m])*)^(-m). Evaluating the
    result on the circle (``zadeh_eval`` at e^{it}) gives V(re^{it})* U(re^{it}).
    """
    _check_m(V, U)
    if not (V.is_upper and U.is_upper):
        raise ValueError("gram_diagonals needs upper-triangular V and U")
    if not 0 < r <= 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    pieces = defaultdict(list)
    for p, ud in U.diagonals.items():
        for q, vd in V.diagonals.items():
            k = p - q
            vs = vd.adjoint_blocks().shifted(k)
            w = ud.window.intersect(vs.window)
            if w is None:
                continue
            a = vs.blocks[w.lo - vs.window.lo:w.hi - vs.window.lo + 1]
            b = ud.blocks[w.lo - ud.window.lo:w.hi - ud.window.lo + 1]
            pieces[k].append((w, (r ** (p + q)) * (a @ b)))
    diags = {k: _sum_pieces(U.m, pieces[k]) for k in sorted(pieces)}
    return NSOperator(U.m, diags, V.window.union(U.window), _interior(V, U))
