import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _oracles import normal_sf, t_sf_hazard_log10
from speakintent.stats import (
    linregress,
    linregress_summary,
    log_betainc,
    t_sf,
    t_sf_log,
    t_test_vs_random,
    welch_t_test,
)

# log10 tail probabilities computed independently with 50-digit arithmetic
ORACLE_LOG10P = {
    (0.7071, 198): -0.6194851275175061,
    (2.0, 5): -1.2926875867555654,
    (5.0, 30): -4.933735859435598,
    (12.0, 3): -3.2058551324634923,
    (50.0, 198): -113.83489047532403,
    (116.8494, 198): -184.18408220559772,
    (1.5, 1): -0.7277706236522833,
}


class TestTSfLog:
    def test_zero_statistic(self):
        assert t_sf_log(0.0, 198) == pytest.approx(math.log10(0.5), abs=1e-12)

    @pytest.mark.parametrize("t,df", sorted(ORACLE_LOG10P))
    def test_against_high_precision_oracle(self, t, df):
        assert t_sf_log(t, df) == pytest.approx(ORACLE_LOG10P[(t, df)], rel=1e-9, abs=1e-9)

    def test_normal_limit(self):
        # at a million degrees of freedom the tail matches the normal one
        assert t_sf(3.0, 1e6) == pytest.approx(normal_sf(3.0), rel=0.01)

    def test_hazard_expansion_cross_check(self):
        assert t_sf_log(30.494, 198) == pytest.approx(t_sf_hazard_log10(30.494, 198), abs=1.0)

    def test_monotone_decreasing_in_t(self):
        values = [t_sf_log(t, 198) for t in np.linspace(-30.0, 120.0, 151)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_negative_t_complements(self):
        p_pos = t_sf(2.5, 17)
        p_neg = t_sf(-2.5, 17)
        assert p_pos + p_neg == pytest.approx(1.0, abs=1e-12)

    def test_scipy_agreement(self):
        # scipy evaluates the tail in linear space and underflows to
        # log(0) past ~1e-308, so only compare where it is representable
        from scipy import stats as sps

        for t in (0.3, 1.7, 4.0, 9.0, 35.0, 80.0):
            for df in (2, 11, 198, 1000):
                expected = sps.t.logsf(t, df) / math.log(10.0)
                if not math.isfinite(expected):
                    assert t_sf_log(t, df) < -300.0
                    continue
                assert t_sf_log(t, df) == pytest.approx(expected, rel=1e-6, abs=1e-6)

    def test_log_betainc_bounds(self):
        assert log_betainc(3.0, 2.0, 0.0) == -math.inf
        assert log_betainc(3.0, 2.0, 1.0) == 0.0


class TestTTestVsRandom:
    def test_spot_value_strong(self):
        res = t_test_vs_random(0.5690, 0.016, n=100)
        assert res.t_statistic == pytest.approx(30.49397993866984, rel=1e-12)
        assert res.degrees_of_freedom == 198
        assert res.log10_p == pytest.approx(-76.31079420809141, abs=1e-6)

    def test_spot_value_extreme(self):
        res = t_test_vs_random(0.5661, 0.004, n=100)
        assert res.log10_p == pytest.approx(-184.18407900718626, abs=1e-5)

    def test_null_case(self):
        res = t_test_vs_random(0.5, 0.02, n=100)
        assert res.t_statistic == 0.0
        assert res.p_value == pytest.approx(0.5)
        assert not res.significant

    def test_below_chance_is_insignificant(self):
        res = t_test_vs_random(0.4421, 0.009, n=100)
        assert res.p_value == pytest.approx(1.0, abs=1e-12)
        assert not res.significant

    def test_zero_std_rejected(self):
        with pytest.raises(ValueError):
            t_test_vs_random(0.6, 0.0)

    @given(st.floats(0.5, 0.7), st.floats(0.501, 0.7))
    def test_p_decreasing_in_mean(self, a, b):
        lo, hi = sorted((a, b))
        if hi - lo < 1e-6:
            return
        p_lo = t_test_vs_random(lo, 0.01, n=100).log10_p
        p_hi = t_test_vs_random(hi, 0.01, n=100).log10_p
        assert p_hi < p_lo


class TestWelch:
    def test_equal_variance_reduces_to_pooled_df(self):
        res = welch_t_test(0.5852, 0.009, 100, 0.5377, 0.009, 100)
        assert res.degrees_of_freedom == pytest.approx(198.0, abs=1e-9)

    def test_unequal_variance_df(self):
        res = welch_t_test(0.5648, 0.008, 100, 0.4421, 0.009, 100)
        assert res.t_statistic == pytest.approx(101.89680378053892, rel=1e-12)
        assert res.degrees_of_freedom == pytest.approx(195.3152857276907, rel=1e-12)
        assert res.log10_p == pytest.approx(-170.84797159282067, abs=1e-5)

    def test_identical_samples(self):
        res = welch_t_test(0.5, 0.01, 100, 0.5, 0.01, 100)
        assert res.t_statistic == 0.0
        assert res.p_value == pytest.approx(0.5)

    def test_one_sided_is_swap_invariant(self):
        a = welch_t_test(0.52, 0.01, 100, 0.58, 0.012, 100)
        b = welch_t_test(0.58, 0.012, 100, 0.52, 0.01, 100)
        assert a.t_statistic == pytest.approx(-b.t_statistic)
        assert a.p_value == pytest.approx(b.p_value)

    def test_directional_swap_flips_p(self):
        a = welch_t_test(0.52, 0.01, 100, 0.55, 0.012, 100, alternative="greater")
        b = welch_t_test(0.55, 0.012, 100, 0.52, 0.01, 100, alternative="greater")
        assert a.t_statistic == pytest.approx(-b.t_statistic)
        assert a.p_value + b.p_value == pytest.approx(1.0, abs=1e-9)

    def test_two_sided_doubles(self):
        one = welch_t_test(0.52, 0.01, 50, 0.55, 0.012, 60)
        two = welch_t_test(0.52, 0.01, 50, 0.55, 0.012, 60, alternative="two-sided")
        assert two.log10_p == pytest.approx(math.log10(2.0) + one.log10_p, abs=1e-12)

    def test_unknown_alternative(self):
        with pytest.raises(ValueError):
            welch_t_test(0.5, 0.01, 10, 0.5, 0.01, 10, alternative="weird")


REFERENCE_ROWS = {
    "all": ([0.5661, 0.5378, 0.4939, 0.4870], [0.004, 0.004, 0.004, 0.003], -0.0281, 0.927),
    "successful": ([0.5690, 0.5283, 0.5012, 0.4937], [0.016, 0.015, 0.012, 0.013], -0.0253, 0.750),
    "unsuccessful": ([0.5606, 0.5635, 0.4807, 0.4850], [0.012, 0.011, 0.011, 0.009], -0.0309, 0.711),
    "unsuccessful_start": ([0.5246, 0.5852, 0.5272, 0.5648], [0.012, 0.009, 0.009, 0.008], 0.0063, 0.0658),
    "unsuccessful_continue": ([0.5860, 0.5377, 0.4964, 0.4421], [0.012, 0.009, 0.009, 0.009], -0.0473, 0.967),
}


class TestLinregress:
    def test_exact_line(self):
        res = linregress([1, 2, 3, 4], [1.0, 3.0, 5.0, 7.0])
        assert res.slope == pytest.approx(2.0)
        assert res.intercept == pytest.approx(-1.0)
        assert res.r_squared == pytest.approx(1.0)

    def test_degenerate_x(self):
        with pytest.raises(ValueError):
            linregress([2, 2, 2], [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("name", sorted(REFERENCE_ROWS))
    def test_reference_slopes(self, name):
        means, _, slope_ref, _ = REFERENCE_ROWS[name]
        res = linregress([1, 2, 3, 4], means)
        assert res.slope == pytest.approx(slope_ref, abs=0.001)

    @pytest.mark.parametrize("name", sorted(REFERENCE_ROWS))
    def test_reference_r_squared_with_pooled_variance(self, name):
        # the reference fits ran through all repetition points, so the
        # within-cell variance belongs in the total sum of squares
        means, stds, slope_ref, r2_ref = REFERENCE_ROWS[name]
        res = linregress_summary([1, 2, 3, 4], means, stds, n=100)
        assert res.slope == pytest.approx(slope_ref, abs=0.001)
        assert res.r_squared == pytest.approx(r2_ref, abs=0.01)

    def test_summary_matches_full_point_cloud(self):
        rng = np.random.default_rng(5)
        xs = np.repeat([1.0, 2.0, 3.0, 4.0], 50)
        ys = 0.6 - 0.03 * xs + rng.normal(0, 0.01, size=xs.size)
        full = linregress(xs, ys)
        means = [ys[xs == v].mean() for v in (1, 2, 3, 4)]
        stds = [ys[xs == v].std(ddof=1) for v in (1, 2, 3, 4)]
        summary = linregress_summary([1, 2, 3, 4], means, stds, n=50)
        assert summary.slope == pytest.approx(full.slope, rel=1e-12)
        assert summary.intercept == pytest.approx(full.intercept, rel=1e-12)
        assert summary.r_squared == pytest.approx(full.r_squared, rel=1e-9)

    def test_r_squared_within_bounds(self):
        rng = np.random.default_rng(6)
        res = linregress(np.arange(10.0), rng.normal(size=10))
        assert 0.0 <= res.r_squared <= 1.0
