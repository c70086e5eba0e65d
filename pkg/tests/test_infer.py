import math

import numpy as np
import pytest
from scipy.stats import norm

from fracidx import (
    CLTRegimeError,
    EstimatorConfig,
    FractalEstimate,
    NoiseSpec,
    add_noise,
    confidence_interval,
    noise_test,
    simulate_fbm,
    standard_error,
)
from fracidx import test_alpha as index_test
from fracidx import test_alpha_robust as robust_index_test
from fracidx.asymvar import VarianceEngine
from fracidx.infer import alpha_test_statistic


@pytest.fixture(scope="module")
def engine():
    # small inner Monte Carlo: statistically crude but fast and cached in-process
    return VarianceEngine(n_inner=2000, B=2000, master_seed=17, use_disk_cache=False)


class TestStatisticForm:
    def test_zero_at_null(self):
        assert alpha_test_statistic(-0.2, -0.2, 1000, 1.0, 0.5) == 0.0

    def test_exact_formula(self):
        got = alpha_test_statistic(-0.1, -0.2, 400, 1.1, 0.25)
        want = math.sqrt(400) * 0.1 / (1.1 * 0.5)
        assert got == pytest.approx(want, rel=1e-12)


class TestTestAlpha:
    def test_null_center_gives_pvalue_one(self):
        # two-sided p-value of a zero statistic
        assert 2.0 * norm.sf(0.0) == pytest.approx(1.0)

    def test_reject_iff_p_below_level(self, engine):
        path = simulate_fbm(2000, -0.2, 4)
        for alpha0 in (-0.3, -0.2, 0.0):
            res = index_test(path, alpha0, EstimatorConfig(p=2, m=5), engine)
            assert res.reject == (res.p_value < res.level)
            assert 0.0 <= res.p_value <= 1.0

    def test_statistic_recomputable_from_parts(self, engine):
        from fracidx import estimate_alpha

        path = simulate_fbm(1500, -0.1, 6)
        cfg = EstimatorConfig(p=2, m=5)
        res = index_test(path, -0.1, cfg, engine)
        est = estimate_alpha(path, cfg)
        manual = alpha_test_statistic(est.alpha_hat, -0.1, est.n, est.s_p_hat, res.variance_used)
        assert res.statistic == pytest.approx(manual, rel=1e-12)
        assert res.variance_source["evaluated_at_alpha"] == -0.1

    def test_null_outside_clt_regime(self, engine):
        path = simulate_fbm(500, 0.1, 2)
        with pytest.raises(CLTRegimeError):
            index_test(path, 0.3, EstimatorConfig(m=5), engine)
        with pytest.raises(CLTRegimeError):
            index_test(path, -0.6, EstimatorConfig(m=5), engine)

    def test_deterministic(self, engine):
        path = simulate_fbm(1000, -0.2, 5)
        a = index_test(path, -0.2, EstimatorConfig(m=5), engine)
        b = index_test(path, -0.2, EstimatorConfig(m=5), engine)
        assert a.statistic == b.statistic and a.p_value == b.p_value


class TestTestAlphaRobust:
    def test_two_sided_and_consistent(self, engine):
        path = simulate_fbm(2000, 0.0, 8)
        res = robust_index_test(path, 0.0, EstimatorConfig(p=2, m=5, kappa=10), engine)
        assert res.reject == (res.p_value < 0.05)
        assert res.variance_source["kind"] == "lambda-star"

    def test_regime_guard(self, engine):
        path = simulate_fbm(500, 0.0, 2)
        with pytest.raises(CLTRegimeError):
            robust_index_test(path, 0.26, EstimatorConfig(m=2, kappa=5), engine)


class TestNoiseTest:
    def test_centered_statistic_gives_half(self):
        # one-sided upper-tail p-value at the null center
        assert float(norm.sf(0.0)) == pytest.approx(0.5)

    def test_clean_path_usually_accepts(self, engine):
        path = simulate_fbm(2000, 0.0, 9)
        res = noise_test(path, EstimatorConfig(p=2, m=5, kappa=10), engine)
        assert res.null_spec == "no noise"
        assert res.p_value > 0.01

    def test_contaminated_path_rejects(self, engine):
        path = simulate_fbm(1600, 0.0, 10)
        noisy = add_noise(path, NoiseSpec(1.0, 0.05), 11)
        res = noise_test(noisy, EstimatorConfig(p=2, m=5, kappa=10), engine)
        assert res.statistic > norm.ppf(0.95)
        assert res.reject

    def test_variance_evaluated_at_robust_estimate(self, engine):
        from fracidx import estimate_alpha_robust

        path = simulate_fbm(1500, -0.1, 12)
        cfg = EstimatorConfig(p=2, m=5, kappa=10)
        res = noise_test(path, cfg, engine)
        est_r = estimate_alpha_robust(path, cfg)
        assert res.variance_source["evaluated_at_alpha"] == round(est_r.alpha_hat, 4)

    @pytest.mark.slow
    def test_median_statistic_diverges_under_noise(self):
        # theory: the statistic tends to +infinity under contamination.
        # Contaminated robust estimates occasionally fall where the variance
        # cannot be evaluated (documented failure mode); skip those seeds.
        from fracidx import NonpositiveGapError, ValidationError

        engine = VarianceEngine(n_inner=1600, B=500, master_seed=23, use_disk_cache=False)
        cfg = EstimatorConfig(p=2, m=5, kappa=10)
        stats = []
        for seed in range(40):
            path = simulate_fbm(1600, 0.0, 1000 + seed)
            noisy = add_noise(path, NoiseSpec(1.0, 0.05), 2000 + seed)
            try:
                stats.append(noise_test(noisy, cfg, engine).statistic)
            except (NonpositiveGapError, ValidationError):
                continue
        assert len(stats) >= 20
        assert np.median(stats) > norm.ppf(0.95)


class TestConfidenceInterval:
    def _estimate(self, alpha_hat, n, s_p=1.0, robust=False):
        return FractalEstimate(alpha_hat, 2 * (alpha_hat + 0.5), s_p,
                               EstimatorConfig(p=2, m=5, kappa=10), n, robust)

    def test_one_sigma_width_at_level_032(self, engine):
        est = self._estimate(-0.2, 1000)
        lo, hi = confidence_interval(est, engine, level=0.32)
        se = standard_error(est, engine)
        half = (hi - lo) / 2
        # z_{0.84} is within 1% of 1
        assert half == pytest.approx(se, rel=0.01)

    def test_width_halves_when_n_quadruples(self, engine):
        lo1, hi1 = confidence_interval(self._estimate(-0.2, 1000), engine)
        lo4, hi4 = confidence_interval(self._estimate(-0.2, 4000), engine)
        assert (hi1 - lo1) == pytest.approx(2.0 * (hi4 - lo4), rel=1e-9)

    def test_regime_guard(self, engine):
        with pytest.raises(CLTRegimeError):
            confidence_interval(self._estimate(0.3, 1000), engine)

    def test_centered_on_estimate(self, engine):
        est = self._estimate(-0.15, 2000)
        lo, hi = confidence_interval(est, engine)
        assert (lo + hi) / 2 == pytest.approx(-0.15, abs=1e-12)

    @pytest.mark.slow
    def test_coverage_on_fbm(self):
        # 95% nominal coverage at alpha=-0.2.  The plug-in variance is
        # evaluated on a 0.02-wide index grid so the expensive inner Monte
        # Carlo runs a handful of times instead of once per seed; the
        # variance is smooth in the index, so coverage is unaffected at this
        # tolerance.
        from fracidx import estimate_alpha
        from fracidx.studies import batch_plain_alpha, batch_sp
        from fracidx.seeding import child_sequence
        from fracidx.simulate import fbm_batch

        engine = VarianceEngine(n_inner=10_000, B=10_000, master_seed=1833, workers=2)
        cfg = EstimatorConfig(p=2, m=5)
        n, trials = 10_000, 1000
        z = norm.ppf(0.975)
        hits = 0
        seqs = [child_sequence(3100, "cov", j) for j in range(trials // 2)]
        for lo_i in range(0, len(seqs), 128):
            paths = fbm_batch(-0.2, n, seqs[lo_i : lo_i + 128])
            ah = batch_plain_alpha(paths, 2.0, 5)
            sp = batch_sp(paths, 2.0)
            for a, s in zip(ah, sp):
                sigma2 = engine.sigma2(round(a / 0.02) * 0.02, 2.0, 5)
                half = z * s * math.sqrt(sigma2 / n)
                hits += a - half <= -0.2 <= a + half
        assert hits / trials == pytest.approx(0.95, abs=0.02)
