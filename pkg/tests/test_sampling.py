"""Gaussian ensembles: determinism, spectral variances, counterterms."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusnlw.sampling import (
    VARIANTS,
    EnsembleSpec,
    counterterm,
    sample,
    wave_counterterm,
)
from torusnlw.spectral import integrate


def make_spec(variant="mu_s", s=2.0, K=4, N=None, seed=0, **kw):
    return EnsembleSpec(
        variant=variant,
        s=s,
        sample_max_mode=K,
        truncation_N=K if N is None else N,
        master_seed=seed,
        **kw,
    )


class TestSpecValidation:
    def test_variant_checked(self):
        with pytest.raises(ValueError, match="variant"):
            make_spec(variant="mu_q")

    def test_s_must_exceed_one(self):
        with pytest.raises(ValueError, match="s must be"):
            make_spec(s=1.0)

    def test_beta_checked_for_beta_variant(self):
        with pytest.raises(ValueError, match="beta"):
            make_spec(variant="mu_s_beta", beta=1.0)
        make_spec(variant="mu_s_beta", beta=2.0)  # fine

    def test_window_must_cover_cutoff(self):
        with pytest.raises(ValueError, match="cover the cutoff"):
            make_spec(K=4, N=8)

    def test_radius_positive(self):
        with pytest.raises(ValueError, match="positive"):
            make_spec(energy_cutoff_r=0.0)

    def test_equation_pairing(self):
        assert make_spec(variant="mu_s").equation == "nlkg"
        assert make_spec(variant="mu_tilde_s").equation == "nlw"
        assert make_spec(variant="mu_s_beta", beta=2.0).equation == "nlkg_beta"


class TestDeterminism:
    def test_same_key_same_draw(self):
        spec = make_spec()
        a, b = sample(spec, 7), sample(spec, 7)
        np.testing.assert_array_equal(a.u.coeffs, b.u.coeffs)
        np.testing.assert_array_equal(a.v.coeffs, b.v.coeffs)

    def test_different_index_different_draw(self):
        spec = make_spec()
        a, b = sample(spec, 0), sample(spec, 1)
        assert not np.array_equal(a.u.coeffs, b.u.coeffs)

    def test_different_seed_different_draw(self):
        a = sample(make_spec(seed=0), 0)
        b = sample(make_spec(seed=1), 0)
        assert not np.array_equal(a.u.coeffs, b.u.coeffs)

    def test_draws_do_not_depend_on_order(self):
        spec = make_spec()
        forward = [sample(spec, i).u.coeffs for i in range(5)]
        backward = [sample(spec, i).u.coeffs for i in reversed(range(5))]
        for got, ref in zip(forward, reversed(backward)):
            np.testing.assert_array_equal(got, ref)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError, match="index"):
            sample(make_spec(), -1)

    @given(st.sampled_from(VARIANTS), st.integers(0, 50))
    def test_structure_invariants(self, variant, index):
        spec = make_spec(variant=variant, beta=2.0 if variant == "mu_s_beta" else 0.0)
        p = sample(spec, index)
        K = spec.sample_max_mode
        # mean mode real, Hermitian mirror holds exactly by construction
        assert p.u.coeffs[K, K].imag == 0.0
        np.testing.assert_array_equal(p.u.coeffs, np.conj(p.u.coeffs[::-1, ::-1]))
        np.testing.assert_array_equal(p.v.coeffs, np.conj(p.v.coeffs[::-1, ::-1]))


def empirical_mode_power(spec, mode, n_samples=4000, which="u"):
    K = spec.sample_max_mode
    i, j = mode[0] + K, mode[1] + K
    acc = 0.0
    for idx in range(n_samples):
        p = sample(spec, idx)
        c = p.u.coeffs if which == "u" else p.v.coeffs
        acc += abs(c[i, j]) ** 2
    return acc / n_samples


class TestSpectralVariances:
    # 4000 draws put the standard error of E|c_n|^2 near 1.6% of the mean,
    # so a 10% tolerance is a > 6 sigma guard band.

    def test_mu_s_position_weight(self):
        # E|u_n|^2 = <n>^-(2s+2) = 1/8 at n = (1,0), s = 2
        spec = make_spec(variant="mu_s", s=2.0, K=2)
        assert empirical_mode_power(spec, (1, 0)) == pytest.approx(1 / 8, rel=0.10)

    def test_mu_s_velocity_weight(self):
        # E|v_n|^2 = <n>^-2s = 1/4 at n = (1,0), s = 2
        spec = make_spec(variant="mu_s", s=2.0, K=2)
        assert empirical_mode_power(spec, (1, 0), which="v") == pytest.approx(
            1 / 4, rel=0.10
        )

    def test_mu_tilde_position_weight(self):
        # E|u_n|^2 = 1/(1 + |n|^2 + |n|^(2s+2)) = 1/3 at n = (1,0), s = 2
        spec = make_spec(variant="mu_tilde_s", s=2.0, K=2)
        assert empirical_mode_power(spec, (1, 0)) == pytest.approx(1 / 3, rel=0.10)

    def test_mu_beta_position_weight(self):
        # E|u_n|^2 = <n>^-(2s+2beta) = 2^-5 at n = (1,0), s = 2, beta = 3
        spec = make_spec(variant="mu_s_beta", s=2.0, beta=3.0, K=2)
        assert empirical_mode_power(spec, (1, 0)) == pytest.approx(2**-5, rel=0.10)

    def test_zero_mode_unit_variance(self):
        spec = make_spec(variant="mu_s", s=2.0, K=2)
        assert empirical_mode_power(spec, (0, 0)) == pytest.approx(1.0, rel=0.10)

    def test_mean_is_centred(self):
        spec = make_spec(variant="mu_s", s=2.0, K=2)
        acc = sum(integrate(sample(spec, i).u) for i in range(4000)) / 4000
        assert abs(acc) < 0.08  # standard error 1/sqrt(4000) ~ 0.016


class TestCounterterms:
    def test_counterterm_n1_exact(self):
        # |n| <= 1: center 1, four neighbours 1/2 each -> 3
        assert counterterm(1) == pytest.approx(3.0, abs=1e-14)

    def test_counterterm_n2_exact(self):
        # 1 + 4/2 + 4/3 + 4/5 = 77/15 over the |n| <= 2 ball
        expect = Fraction(1) + 4 * Fraction(1, 2) + 4 * Fraction(1, 3) + 4 * Fraction(1, 5)
        assert expect == Fraction(77, 15)
        assert counterterm(2) == pytest.approx(float(expect), abs=1e-14)

    def test_counterterm_rational_oracle(self):
        # independent exact summation over the ball
        for N in (3, 5, 8):
            acc = Fraction(0)
            for n1 in range(-N, N + 1):
                for n2 in range(-N, N + 1):
                    if n1 * n1 + n2 * n2 <= N * N:
                        acc += Fraction(1, 1 + n1 * n1 + n2 * n2)
            assert counterterm(N) == pytest.approx(float(acc), rel=1e-14)

    def test_wave_counterterm_n1_exact(self):
        # n = 0 contributes 0; four unit modes contribute 1/3 each
        assert wave_counterterm(1, 2.0) == pytest.approx(4 / 3, abs=1e-14)

    def test_wave_counterterm_rational_oracle(self):
        for N in (2, 4):
            acc = Fraction(0)
            for n1 in range(-N, N + 1):
                for n2 in range(-N, N + 1):
                    q = n1 * n1 + n2 * n2
                    if 0 < q <= N * N:
                        acc += Fraction(q**2, 1 + q + q**3)
            assert wave_counterterm(N, 2.0) == pytest.approx(float(acc), rel=1e-14)

    def test_counterterm_grows_like_log(self):
        # dyadic increments approach 2 pi log 2
        gaps = [counterterm(2 * N) - counterterm(N) for N in (64, 128, 256)]
        for g in gaps:
            assert g == pytest.approx(2 * math.pi * math.log(2), rel=0.02)

    def test_validation(self):
        with pytest.raises(ValueError):
            counterterm(-1)
        with pytest.raises(ValueError):
            wave_counterterm(2, 0.0)
