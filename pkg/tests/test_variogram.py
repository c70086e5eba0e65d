import math

import numpy as np
import pytest

from fracidx import (
    ValidationError,
    empirical_variogram,
    fbm_variogram,
    kappa_difference,
    moment_constant,
    simulate_fbm,
    variogram_curve,
)


class TestEmpiricalVariogram:
    def test_alternating_path_lag1(self):
        assert empirical_variogram([0.0, 1.0, 0.0, 1.0], 2.0, 1) == pytest.approx(1.0)

    def test_alternating_path_lag2(self):
        assert empirical_variogram([0.0, 1.0, 0.0, 1.0], 2.0, 2) == pytest.approx(0.0)

    def test_constant_path(self):
        assert empirical_variogram(np.full(50, 3.3), 1.7, 5) == 0.0

    def test_lag_bounds(self):
        with pytest.raises(ValidationError):
            empirical_variogram(np.zeros(10), 2.0, 10)
        with pytest.raises(ValidationError):
            empirical_variogram(np.zeros(10), 2.0, 0)

    def test_divisor_is_n_minus_k(self):
        x = np.array([0.0, 2.0, 0.0])
        # lag-1 diffs (2, -2): mean of |.|^1 = 2; lag-2 diff (0,)
        assert empirical_variogram(x, 1.0, 1) == pytest.approx(2.0)
        assert empirical_variogram(x, 1.0, 2) == pytest.approx(0.0)

    def test_scale_and_shift_equivariance(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(200)
        for p in (1.0, 2.0, 2.6):
            for c, mu in ((-3.0, 4.0), (0.5, -1.0)):
                got = empirical_variogram(c * x + mu, p, 3)
                want = abs(c) ** p * empirical_variogram(x, p, 3)
                assert got == pytest.approx(want, rel=1e-12)

    def test_reversal_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(300)
        for k in (1, 2, 11):
            assert empirical_variogram(x[::-1], 1.5, k) == pytest.approx(
                empirical_variogram(x, 1.5, k), rel=1e-12
            )


class TestKappaDifference:
    def test_linear_path(self):
        n = 100
        x = np.arange(1, n + 1) / n
        assert kappa_difference(x, 2.0, 1, 2) == pytest.approx(3.0 / n**2, rel=1e-12)

    def test_legal_negativity(self):
        assert kappa_difference([0.0, 1.0, 0.0, 1.0], 2.0, 1, 2) == pytest.approx(-1.0)

    def test_matches_manual_composition(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(150)
        for p, k, kappa in ((2.0, 1, 2), (1.0, 3, 4), (3.0, 2, 5)):
            manual = empirical_variogram(x, p, kappa * k) ** (2 / p) - empirical_variogram(
                x, p, k
            ) ** (2 / p)
            assert kappa_difference(x, p, k, kappa) == pytest.approx(manual, rel=1e-12)

    def test_kappa_bounds(self):
        with pytest.raises(ValidationError):
            kappa_difference(np.zeros(10), 2.0, 5, 2)  # kappa*k = 10 > n-1
        with pytest.raises(ValidationError):
            kappa_difference(np.zeros(10), 2.0, 1, 1)

    def test_noise_shift_cancellation_p2(self):
        # adding a constant to every gamma_2 value leaves the gap unchanged:
        # the identity behind the robust estimator, at the value level
        rng = np.random.default_rng(3)
        x = rng.standard_normal(120)
        g1 = empirical_variogram(x, 2.0, 2)
        g2 = empirical_variogram(x, 2.0, 4)
        gap = g2 - g1
        for shift in (0.1, 5.0):
            assert (g2 + shift) - (g1 + shift) == pytest.approx(gap, rel=1e-12)


class TestFbmVariogram:
    def test_p2_is_exact_power(self):
        for h, alpha in ((0.001, -0.3), (0.25, 0.2), (1.0, 0.0)):
            assert fbm_variogram(2.0, h, alpha) == pytest.approx(
                h ** (2 * alpha + 1), rel=1e-12
            )

    def test_brownian_lag(self):
        assert fbm_variogram(2.0, 1 / 500, 0.0) == pytest.approx(1 / 500, rel=1e-12)

    def test_gaussian_first_moment(self):
        assert fbm_variogram(1.0, 1.0, 0.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)

    def test_gaussian_fourth_moment(self):
        for alpha in (-0.3, 0.0, 0.4):
            assert fbm_variogram(4.0, 1.0, alpha) == pytest.approx(3.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValidationError):
            fbm_variogram(2.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            fbm_variogram(-1.0, 0.5, 0.0)


class TestMomentConstant:
    @pytest.mark.parametrize("s,want", [(1.0, math.sqrt(2 / math.pi)), (2.0, 1.0), (4.0, 3.0)])
    def test_known_values(self, s, want):
        assert moment_constant(s) == pytest.approx(want, rel=1e-12)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(4)
        z = np.abs(rng.standard_normal(200_000))
        for s in (0.5, 1.5, 3.0):
            got = (z**s).mean()
            assert got == pytest.approx(moment_constant(s), rel=0.02)


class TestVariogramCurve:
    def test_curve_matches_pointwise(self):
        path = simulate_fbm(400, -0.1, 5)
        curve = variogram_curve(path, 2.0, 6)
        for j, k in enumerate(curve.lags):
            assert curve.values[j] == pytest.approx(
                empirical_variogram(path, 2.0, int(k)), rel=1e-12
            )

    def test_invariants_enforced(self):
        from fracidx.variogram import VariogramCurve

        with pytest.raises(ValidationError):
            VariogramCurve(2.0, np.array([2, 1]), np.array([0.1, 0.2]), 10)
        with pytest.raises(ValidationError):
            VariogramCurve(2.0, np.array([1, 2]), np.array([-0.1, 0.2]), 10)
        with pytest.raises(ValidationError):
            VariogramCurve(2.0, np.array([1, 10]), np.array([0.1, 0.2]), 10)
