"""
Spectral factorization W = U* U with U and U^{-1} upper triangular.

The factor is computed by the finite-section method: W is cut to a window
padded by ``pad`` indices on each side, factored by band Cholesky, and the
diagonals of the factor are read back. The same is done with padding
``2 * pad``; columns where the two agree to within ``tol`` form the accepted
window. Rows of an upper Cholesky factor depend only on the part of W above
them, so the padding is what supplies the past that the infinite factor sees.

Where W has no data in the padded region its diagonals are continued by
their edge blocks (``extend_edges``); this is exact for stationary W.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import (NotSelfAdjointError, add, adjoint, is_self_adjoint, max_abs_diff,
                      multiply, phi_of, wiener_norm)
from .dense_oracle import (DELTA_PD, NotPositiveDefiniteError, SingularBlockError,
                           cholesky_upper, extract_diagonals, min_eig_lower_bound, render,
                           triangular_solve_upper)
from .diag_core import (Diagonal, IndexWindow, NSOperator, extend_edges, identity,
                        restrict)
from .zadeh import zadeh_eval

log = logging.getLogger(__name__)

SELF_ADJOINT_TOL = 1e-10
CAYLEY_SAMPLES = (0.0, 0.5, 0.9 * np.exp(1.2j), np.exp(0.3j))


class NotUniformlyPositiveError(ValueError):
    def __init__(self, certificate, window=None):
        super().__init__(
            f"not uniformly positive on window {window}: certificate {certificate:.6g}")
        self.certificate = certificate
        self.window = window


class StabilizationError(RuntimeError):
    def __init__(self, gap, tol):
        super().__init__(f"finite sections did not stabilize: gap {gap:.3e} >= tol {tol:.1e}")
        self.gap = gap
        self.tol = tol


class DecayWarning(RuntimeWarning):
    """Inverse diagonals are not decaying geometrically on this window."""


@dataclass(frozen=True, eq=False)
class FactorizationReport:
    factor: NSOperator
    inverse_factor: NSOperator
    reconstruction_residual: float
    inverse_residual: float
    stabilization_gap: float
    accepted_window: IndexWindow
    min_eig_certificate: float
    tail_mass: float
    # run parameters, needed to reproduce or verify the factorization
    target_window: IndexWindow | None = None
    pad: int = 0
    tol: float = 1e-6
    decay_rate: float = float("nan")
    eps_tail: float = 1e-10
    max_offset: int | None = None
    column_gaps: np.ndarray = field(default=None, repr=False)

    def summary(self) -> dict:
        return {
            "reconstruction_residual": self.reconstruction_residual,
            "inverse_residual": self.inverse_residual,
            "stabilization_gap": self.stabilization_gap,
            "accepted_window": [self.accepted_window.lo, self.accepted_window.hi],
            "target_window": None if self.target_window is None
            else [self.target_window.lo, self.target_window.hi],
            "min_eig_certificate": self.min_eig_certificate,
            "tail_mass": self.tail_mass,
            "decay_rate": self.decay_rate,
            "pad": self.pad,
            "tol": self.tol,
        }


def _symmetric_radius(W: NSOperator) -> int:
    sup = W.nonzero_support
    if not sup:
        return 0
    b = max(sup)
    if -min(sup) != b:
        raise NotSelfAdjointError(f"support [{min(sup)}, {b}] is not symmetric")
    return b


def default_pad(W: NSOperator) -> int:
    """Four times the support width n_max - n_min + 1."""
    sup = W.nonzero_support or [0]
    return 4 * (max(sup) - min(sup) + 1)


def positivity_certificate(W: NSOperator, window=None, tol: float = 1e-9) -> float:
    """Certified lower bound on the smallest eigenvalue of W's section over ``window``."""
    window = W.window if window is None else IndexWindow.coerce(window)
    if not is_self_adjoint(W, SELF_ADJOINT_TOL):
        raise NotSelfAdjointError("W is not self-adjoint")
    return min_eig_lower_bound(render(extend_edges(W, window), window), tol)


def check_positive(W: NSOperator, window=None, delta: float = DELTA_PD) -> float:
    """Return the positivity certificate of W on ``window``; raise if it is below delta."""
    window = W.window if window is None else IndexWindow.coerce(window)
    cert = positivity_certificate(W, window)
    if cert < delta:
        raise NotUniformlyPositiveError(cert, window)
    return cert


def triangular_inverse(U: NSOperator, eps_tail: float = 1e-10,
                       max_offset: int | None = None) -> tuple[NSOperator, float]:
    """Upper-triangular V with U V = I, built diagonal by diagonal.

    V_[0] is the blockwise inverse of U_[0] and, for k >= 1,

        V_[k] = -((U_[0])^(k))^{-1} sum_{n=1..k} U_[n]^(k-n) V_[k-n].

    Blocks are only produced at columns where every ingredient is stored, so
    V is exactly the inverse of U's section over U_[0]'s window, cut at the
    first run of ``b`` consecutive diagonals below ``eps_tail`` (b = U's
    bandwidth) or at ``max_offset``. Returns V and the Wiener norm of the
    first omitted diagonal.
    """
    if not U.is_upper:
        raise ValueError("triangular_inverse needs an upper-triangular operator")
    u = {n: d for n, d in U.diagonals.items() if not d.is_zero()}
    if 0 not in u:
        raise SingularBlockError("U_[0] is zero")
    b = max(u)
    if max_offset is None:
        max_offset = 8 * (b + 1)
    d0 = u[0]
    try:
        inv0 = np.linalg.inv(d0.blocks)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError("singular U_[0] block") from exc
    smin = np.linalg.svd(d0.blocks, compute_uv=False).min()
    if smin <= 1e-14 * max(1.0, float(np.abs(d0.blocks).max())):
        raise SingularBlockError(f"U_[0] has a block with smallest singular value {smin:.3e}")

    V = {0: Diagonal._wrap(d0.window, inv0)}
    if b == 0:
        return NSOperator(U.m, V, U.window, U.exact_interior), 0.0
    norms = [V[0].norm()]
    tail = 0.0
    for k in range(1, max_offset + 2):
        acc = None
        for n in range(1, min(k, b) + 1):
            un, vk = u.get(n), V.get(k - n)
            if un is None or vk is None:
                continue
            un_s = un.shifted(k - n)
            w = un_s.window.intersect(vk.window)
            if w is None:
                continue
            term = un_s.on(w) @ vk.on(w)
            acc = (w, term) if acc is None else _accumulate(acc, w, term)
        vk_diag = None
        if acc is not None:
            inv_s = Diagonal._wrap(d0.window.shift(k), inv0)
            w = inv_s.window.intersect(acc[0])
            if w is not None:
                blocks = -(inv_s.on(w) @ _slice(acc, w))
                vk_diag = Diagonal._wrap(w, blocks)
        nk = vk_diag.norm() if vk_diag is not None else 0.0
        if k == max_offset + 1:
            tail = nk
            break
        if vk_diag is not None:
            V[k] = vk_diag
        norms.append(nk)
        if len(norms) > b and all(x < eps_tail for x in norms[-b:]):
            first = k - b + 1
            tail = norms[first]
            for j in range(first, k + 1):
                V.pop(j, None)
            break

    inv = NSOperator(U.m, V, U.window, U.exact_interior)
    rho = decay_rate(inv)
    if np.isfinite(rho) and rho >= 1:
        warnings.warn(f"inverse diagonals do not decay (fitted rate {rho:.3f}); "
                      "the inverse may not be Wiener-summable on this window", DecayWarning)
    return inv, float(tail)


def _accumulate(acc, w, term):
    w0, a0 = acc
    hull = w0.union(w)
    out = np.zeros((len(hull),) + a0.shape[1:], dtype=complex)
    out[w0.lo - hull.lo:w0.hi - hull.lo + 1] += a0
    out[w.lo - hull.lo:w.hi - hull.lo + 1] += term
    return hull, out


def _slice(acc, w):
    w0, a0 = acc
    return a0[w.lo - w0.lo:w.hi - w0.lo + 1]


def decay_rate(V: NSOperator, floor: float = 1e-300) -> float:
    """Fitted rho in ||V_[k]|| ~ C rho^k, by least squares on log norms over k >= 1."""
    ks, logs = [], []
    for k, d in V.diagonals.items():
        if k < 1:
            continue
        nk = d.norm()
        if nk > floor:
            ks.append(k)
            logs.append(np.log(nk))
    if len(ks) < 2:
        return 0.0 if len(V.nonzero_support) <= 1 else float("nan")
    slope = np.polyfit(np.asarray(ks, float), np.asarray(logs), 1)[0]
    return float(np.exp(slope))


def _section_factor(W, section, delta):
    """Cholesky factor of W's section, as diagonals."""
    T = render(extend_edges(W, section), section)
    R = cholesky_upper(T, delta)
    return extract_diagonals(R)


def _columns(F: NSOperator, cols: IndexWindow, b: int) -> NSOperator:
    """Offsets 0..b of F, keeping only blocks whose column lies in ``cols``."""
    out = {}
    for n in range(b + 1):
        d = F.diagonals.get(n)
        if d is None:
            continue
        w = d.window.intersect(cols)
        if w is not None:
            out[n] = Diagonal._wrap(w, d.on(w))
    return NSOperator(F.m, out, cols.expand(0))


def _longest_run(mask) -> tuple[int, int] | None:
    best, start = None, None
    for i, ok in enumerate(list(mask) + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if best is None or i - start > best[1] - best[0] + 1:
                best = (start, i - 1)
            start = None
    return best


def _residuals(W, factor, inverse, accepted):
    m = W.m
    Wacc = extend_edges(W, accepted)
    recon = restrict(add(Wacc, multiply(adjoint(factor), factor).scale(-1)), accepted)
    prod = restrict(multiply(factor, inverse), accepted)
    inv_res = add(prod, identity(m, accepted).scale(-1))
    return wiener_norm(recon), wiener_norm(inv_res)


def spectral_factor(W: NSOperator, pad: int | None = None, tol: float = 1e-6,
                    window=None, eps_tail: float = 1e-10, max_offset: int | None = None,
                    delta: float = DELTA_PD) -> FactorizationReport:
    """Factor a self-adjoint, uniformly positive W as W = U* U, U upper triangular.

    ``window`` is the target window for the factor (default: W's window).
    The factor is normalized by the Cholesky convention: every U_[0] block is
    upper triangular with a positive diagonal.
    """
    target = W.window if window is None else IndexWindow.coerce(window)
    if not is_self_adjoint(W, SELF_ADJOINT_TOL):
        raise NotSelfAdjointError("W is not self-adjoint")
    b = _symmetric_radius(W)
    pad = default_pad(W) if pad is None else int(pad)
    if pad < 0:
        raise ValueError("pad must be non-negative")
    if max_offset is None:
        max_offset = 8 * (2 * b + 1)

    wide = target.expand(2 * pad)
    cert = positivity_certificate(W, wide)
    if cert < delta:
        raise NotUniformlyPositiveError(cert, wide)

    if b == 0:
        factor = _columns(_section_factor(W, target, delta), target, 0)
        gaps = np.zeros(len(target))
        accepted, gap = target, 0.0
    else:
        try:
            f1 = _section_factor(W, target.expand(pad), delta)
            f2 = _section_factor(W, wide, delta)
        except NotPositiveDefiniteError:
            raise NotUniformlyPositiveError(cert, wide)
        gaps = np.zeros(len(target))
        for n in range(b + 1):
            diff = np.abs(f1.blocks_on(n, target) - f2.blocks_on(n, target)).max(axis=(1, 2))
            gaps = np.maximum(gaps, diff)
        gap = float(gaps.max())
        run = _longest_run(gaps < tol)
        if run is None:
            raise StabilizationError(gap, tol)
        accepted = IndexWindow(target.lo + run[0], target.lo + run[1])
        factor = _columns(f2, accepted, b).pruned().with_meta(accepted, accepted)
        if gap >= tol:
            log.warning("stabilization gap %.3e >= tol on part of %s; accepted %s",
                        gap, target, accepted)

    factor = factor.with_meta(accepted, accepted)
    inverse, tail = triangular_inverse(factor, eps_tail, max_offset)
    recon, inv_res = _residuals(W, factor, inverse, accepted)
    return FactorizationReport(
        factor=factor, inverse_factor=inverse,
        reconstruction_residual=recon, inverse_residual=inv_res,
        stabilization_gap=gap, accepted_window=accepted,
        min_eig_certificate=cert, tail_mass=tail,
        target_window=target, pad=pad, tol=tol,
        decay_rate=decay_rate(inverse), eps_tail=eps_tail, max_offset=max_offset,
        column_gaps=gaps)


def report_from_factor(W: NSOperator, factor: NSOperator, pad: int | None = None,
                       tol: float = 1e-6, eps_tail: float = 1e-10,
                       max_offset: int | None = None) -> FactorizationReport:
    """Wrap an externally supplied factor so it can be verified against W."""
    if not factor.is_upper:
        raise ValueError("factor is not upper triangular")
    d0 = factor.diagonals.get(0)
    if d0 is None:
        raise SingularBlockError("factor has no main diagonal")
    accepted = d0.window
    factor = factor.with_meta(accepted, accepted)
    if max_offset is None:
        max_offset = 8 * (2 * max(factor.nonzero_support) + 1)
    inverse, tail = triangular_inverse(factor, eps_tail, max_offset)
    recon, inv_res = _residuals(W, factor, inverse, accepted)
    return FactorizationReport(
        factor=factor, inverse_factor=inverse, reconstruction_residual=recon,
        inverse_residual=inv_res, stabilization_gap=float("nan"), accepted_window=accepted,
        min_eig_certificate=float("nan"), tail_mass=tail, target_window=accepted,
        pad=default_pad(W) if pad is None else pad, tol=tol, decay_rate=decay_rate(inverse),
        eps_tail=eps_tail, max_offset=max_offset)


def normalize_factor(U: NSOperator) -> NSOperator:
    """Left-multiply U by the block-diagonal unitary that makes each U_[0] block
    upper triangular with positive diagonal (the Cholesky convention).

    Rows outside U_[0]'s window have no defined normalization and are dropped.
    """
    d0 = U.diagonals.get(0)
    if d0 is None:
        raise SingularBlockError("factor has no main diagonal")
    w0 = d0.window
    Q, R = np.linalg.qr(d0.blocks)
    phases = np.sign(np.diagonal(R, axis1=1, axis2=2))
    phases = np.where(phases == 0, 1, phases)
    Q = Q * phases[:, None, :]
    M = np.conj(np.swapaxes(Q, 1, 2))           # M_i U0_i = R_i (positive diagonal)
    Md = Diagonal._wrap(w0, M)
    out = {}
    for n, d in restrict(U, w0).diagonals.items():
        Ms = Md.shifted(n)                     # row i - n of column i
        w = d.window.intersect(Ms.window)
        if w is not None:
            out[n] = Diagonal._wrap(w, Ms.on(w) @ d.on(w))
    return NSOperator(U.m, out, w0, w0)


def cayley_check(W: NSOperator, pad: int = 0, samples=CAYLEY_SAMPLES) -> tuple[float, bool]:
    """Norm of S = (I + Phi)^{-1} (I - Phi) on a section, and positivity of Re Phi(z).

    Phi is the upper-triangular operator with Re Phi = W. The section is W's
    window widened by ``pad`` (edge-extended). Returns the largest singular
    value of the dense S and whether Re Phi(z) has a positive certified
    minimum eigenvalue at each sample point z.
    """
    window = W.window.expand(pad)
    Wx = extend_edges(W, window)
    phi = phi_of(Wx, SELF_ADJOINT_TOL)
    P = render(phi, window, check=False)
    eye = np.eye(P.size)
    S = triangular_solve_upper(P.with_data(eye + P.data), eye - P.data)
    s_norm = float(np.linalg.norm(S, 2))
    re_pos = True
    for z in samples:
        Pz = render(zadeh_eval(phi, z).result, window, check=False).hermitian_part()
        if min_eig_lower_bound(Pz, 1e-9) <= 0:
            re_pos = False
    if s_norm >= 1:
        log.info("Cayley transform is not a strict contraction here (||S|| = %.6g)", s_norm)
    return s_norm, re_pos


@dataclass(frozen=True)
class Verification:
    passed: bool
    reconstruction_residual: float
    circle_residuals: dict
    inverse_residual: float
    uniqueness_gap: float
    tol: float

    def __bool__(self):
        return self.passed

    def as_dict(self):
        return {"passed": self.passed,
                "reconstruction_residual": self.reconstruction_residual,
                "circle_residuals": {repr(float(t)): r for t, r in self.circle_residuals.items()},
                "inverse_residual": self.inverse_residual,
                "uniqueness_gap": self.uniqueness_gap,
                "tol": self.tol}


def circle_residual(W: NSOperator, factor: NSOperator, accepted: IndexWindow, t: float) -> float:
    """max |W(e^{it}) - U(e^{it})* U(e^{it})| over blocks with indices in ``accepted``."""
    z = np.exp(1j * t)
    Wz = render(zadeh_eval(extend_edges(W, accepted), z).result, accepted).data
    b = max(factor.nonzero_support, default=0)
    rows = IndexWindow(accepted.lo - b, accepted.hi)
    Fz = render(zadeh_eval(factor, z).result, rows, check=False).data
    G = Fz.conj().T @ Fz
    s = slice(b * factor.m, None)
    return float(np.abs(Wz - G[s, s]).max())


def verify_factorization(W: NSOperator, report: FactorizationReport,
                         t_samples=(0.0, 1.0, 2.5), tol: float | None = None,
                         alt_pad: int | None = None) -> Verification:
    """Re-check a factorization from scratch.

    Passes when the reconstruction residual, the circle residuals at every
    ``t_samples`` point, and the inverse residual are all within ``tol``, and a
    re-run of ``spectral_factor`` with a different padding gives the same
    normalized factor within ``tol``.
    """
    tol = report.tol if tol is None else tol
    acc = report.accepted_window
    factor = report.factor
    try:
        inverse, _ = triangular_inverse(factor, report.eps_tail, report.max_offset)
        recon, inv_res = _residuals(W, factor, inverse, acc)
        circle = {float(t): circle_residual(W, factor, acc, t) for t in t_samples}
    except (SingularBlockError, ValueError) as exc:
        log.warning("verification could not evaluate residuals: %s", exc)
        return Verification(False, float("inf"), {}, float("inf"), float("inf"), tol)

    pad = alt_pad if alt_pad is not None else (3 * max(report.pad, 1)) // 2 + 1
    try:
        other = spectral_factor(W, pad=pad, tol=tol, window=report.target_window or acc)
        common = other.accepted_window.intersect(acc)
        if common is None:
            uniq = float("inf")
        else:
            a = normalize_factor(restrict_columns(factor, common))
            c = normalize_factor(restrict_columns(other.factor, common))
            uniq = max_abs_diff(a, c)
    except (NotUniformlyPositiveError, StabilizationError, NotPositiveDefiniteError,
            NotSelfAdjointError) as exc:
        log.warning("re-factorization failed: %s", exc)
        uniq = float("inf")

    checks = {"reconstruction": recon, "inverse": inv_res, "uniqueness": uniq,
              **{f"circle t={t:g}": r for t, r in circle.items()}}
    for name, val in checks.items():
        log.info("%s residual %.3e", name, val)
    passed = all(v <= tol for v in checks.values())
    return Verification(passed, recon, circle, inv_res, uniq, tol)


def restrict_columns(F: NSOperator, cols: IndexWindow) -> NSOperator:
    """Blocks of F whose column lies in ``cols`` (rows unrestricted)."""
    out = {}
    for n, d in F.diagonals.items():
        w = d.window.intersect(cols)
        if w is not None:
            out[n] = Diagonal._wrap(w, d.on(w))
    return NSOperator(F.m, out, cols, cols)
