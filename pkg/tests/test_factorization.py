from dataclasses import replace

import numpy as np
import pytest

from nswiener import (Diagonal, IndexWindow, NSOperator, cayley_check, check_positive, identity,
                      multiply, normalize_factor, spectral_factor, triangular_inverse,
                      verify_factorization, wiener_norm)
from nswiener.algebra import NotSelfAdjointError
from nswiener.diag_core import max_abs_diff, restrict, shift
from nswiener.factorization import (DecayWarning, NotUniformlyPositiveError,
                                    StabilizationError, decay_rate, restrict_columns)
from nswiener.sampling import gram_section, random_outer_factor


def stationary(a=0.5, window=(-20, 20)):
    return NSOperator.stationary(IndexWindow(*window), {0: 1 + a * a, 1: a, -1: a})


def sine_factor(window):
    w = IndexWindow.coerce(window)
    D = (0.3 + 0.2 * np.sin(np.arange(w.lo, w.hi + 1))).reshape(-1, 1, 1)
    return identity(1, w) + NSOperator.from_arrays(w, {1: D})


class TestCheckPositive:
    def test_identity(self):
        assert check_positive(identity(2, IndexWindow(0, 9))) == pytest.approx(1, abs=1e-8)

    def test_stationary_limit_from_above(self):
        certs = [check_positive(stationary(0.5, (0, L - 1))) for L in (5, 20, 80)]
        assert all(c > 0.25 for c in certs)
        assert certs[0] > certs[1] > certs[2]
        assert certs[2] - 0.25 < 1e-2

    def test_indefinite(self):
        w = IndexWindow(0, 15)
        W = shift(1, w) + shift(1, w).H
        with pytest.raises(NotUniformlyPositiveError) as err:
            check_positive(restrict(W, w))
        assert err.value.certificate <= 0

    def test_not_self_adjoint(self):
        with pytest.raises(NotSelfAdjointError):
            check_positive(identity(1, IndexWindow(0, 4)) + shift(1, IndexWindow(0, 4)))


class TestTriangularInverse:
    def test_identity(self):
        V, tail = triangular_inverse(identity(2, IndexWindow(0, 5)))
        assert max_abs_diff(V, identity(2, IndexWindow(0, 5))) == 0 and tail == 0

    def test_neumann_series(self):
        w = IndexWindow(-40, 40)
        U = identity(1, w) + shift(1, w) * 0.5
        V, tail = triangular_inverse(U, eps_tail=1e-8, max_offset=200)
        for k in range(0, 12):
            blocks = V.diagonal(k).blocks[:, 0, 0]
            assert np.allclose(blocks, (-0.5) ** k, atol=1e-15)
        assert wiener_norm(V) == pytest.approx(2.0, abs=1e-7)
        assert tail < 1e-8
        assert decay_rate(V) == pytest.approx(0.5, rel=1e-9)

    def test_product_is_identity(self, rng):
        w = IndexWindow(0, 29)
        U = random_outer_factor(rng, 2, w, 2)
        V, tail = triangular_inverse(U, eps_tail=1e-12, max_offset=200)
        P = restrict(multiply(U, V), w)
        assert max_abs_diff(P, identity(2, w)) <= 1e-11
        assert decay_rate(V) < 1

    def test_isolated_zero_diagonal(self):
        # V_[1] = 0 while V_[2] does not vanish
        w = IndexWindow(0, 20)
        U = identity(1, w) + shift(1, w, power=2) * 0.5
        V, _ = triangular_inverse(U, eps_tail=1e-10)
        assert 2 in V.nonzero_support and 4 in V.nonzero_support

    def test_non_decaying_warns(self):
        w = IndexWindow(0, 30)
        U = identity(1, w) * 0.5 + shift(1, w)
        with pytest.warns(DecayWarning):
            triangular_inverse(U, max_offset=20)

    def test_rejects_lower(self):
        w = IndexWindow(0, 4)
        with pytest.raises(ValueError):
            triangular_inverse(identity(1, w) + shift(1, w).H)


class TestSpectralFactor:
    def test_identity(self):
        W = identity(2, IndexWindow(-5, 5))
        rep = spectral_factor(W, pad=4)
        assert max_abs_diff(rep.factor, W) == 0
        assert rep.reconstruction_residual == 0 and rep.inverse_residual == 0
        assert verify_factorization(W, rep)

    def test_stationary_closed_form(self):
        rep = spectral_factor(stationary(), pad=10, tol=1e-6)
        mid = IndexWindow(-10, 9)
        assert rep.accepted_window.covers(mid)
        u0 = rep.factor.blocks_on(0, mid)[:, 0, 0]
        u1 = rep.factor.blocks_on(1, mid)[:, 0, 0]
        assert np.abs(u0 - 1).max() <= 1e-6 and np.abs(u1 - 0.5).max() <= 1e-6
        # time invariance
        acc = rep.accepted_window
        for n in (0, 1):
            blocks = rep.factor.blocks_on(n, acc.shrink(1))
            assert np.ptp(blocks.real) <= 1e-6
        assert rep.factor.nonzero_support == [0, 1]
        assert rep.min_eig_certificate > 0.25
        assert verify_factorization(stationary(), rep, (0.0, 1.0, 2.5))

    def test_sine_round_trip(self):
        window = IndexWindow(-30, 30)
        U = sine_factor(window.expand(25))
        W = gram_section(U)
        rep = spectral_factor(W, pad=10, window=window)
        acc = rep.accepted_window
        assert len(acc) >= 40
        diff = max_abs_diff(restrict_columns(rep.factor, acc), restrict_columns(U, acc))
        assert diff <= 1e-6
        assert rep.reconstruction_residual <= 1e-8

    def test_random_round_trip_block(self, rng):
        target = IndexWindow(0, 29)
        U = random_outer_factor(rng, 2, target.expand(25), 2)
        W = gram_section(U)
        rep = spectral_factor(W, pad=10, window=target)
        acc = rep.accepted_window
        a = normalize_factor(restrict_columns(rep.factor, acc))
        b = normalize_factor(restrict_columns(U, acc))
        assert max_abs_diff(a, b) <= 1e-6
        assert set(rep.factor.nonzero_support) <= {0, 1, 2}
        assert rep.factor.is_upper and rep.inverse_factor.is_upper
        assert target.covers(acc)

    def test_stabilization_failure(self):
        # symbol minimum 1e-6: far too slow to settle within pad 1
        W = stationary(0.999, (0, 20))
        with pytest.raises(StabilizationError):
            spectral_factor(W, pad=1, tol=1e-12)

    def test_indefinite_rejected(self):
        w = IndexWindow(0, 10)
        W = restrict(shift(1, w) + shift(1, w).H, w)
        with pytest.raises(NotUniformlyPositiveError):
            spectral_factor(W, pad=2)

    def test_deterministic(self):
        r1 = spectral_factor(stationary(), pad=6)
        r2 = spectral_factor(stationary(), pad=6)
        assert max_abs_diff(r1.factor, r2.factor) == 0


class TestNormalize:
    def test_unitary_left_factor(self, rng):
        w = IndexWindow(0, 9)
        U = random_outer_factor(rng, 2, w, 1)
        N = normalize_factor(U)
        d = np.diagonal(N.diagonal(0).blocks, axis1=1, axis2=2)
        assert np.all(d.real > 0) and np.allclose(d.imag, 0)
        assert np.allclose(np.tril(N.diagonal(0).blocks, -1), 0)
        # same Gram on the interior
        inner = IndexWindow(1, 9)
        G1 = restrict(multiply(U.H, U), inner)
        G2 = restrict(multiply(N.H, N), inner)
        assert max_abs_diff(G1, G2) <= 1e-13


class TestCayley:
    def test_identity(self):
        s, pos = cayley_check(identity(2, IndexWindow(0, 5)))
        assert s <= 1e-15 and pos

    def test_stationary(self):
        s, pos = cayley_check(stationary(), pad=10)
        assert s < 1 and pos

    def test_scaled(self):
        W = stationary() * 4
        s, _ = cayley_check(W, pad=5)
        assert s < 1


class TestVerify:
    def test_corrupted_factor(self):
        W = stationary()
        rep = spectral_factor(W, pad=10)
        d1 = rep.factor.diagonal(1)
        blocks = d1.blocks.copy()
        blocks[len(blocks) // 2] += 1e-3
        bad = rep.factor.diagonals | {1: Diagonal(d1.window, blocks)}
        corrupted = NSOperator(1, bad, rep.factor.window, rep.factor.exact_interior)
        check = verify_factorization(W, replace(rep, factor=corrupted))
        assert not check
        assert check.reconstruction_residual > 1e-4
