import math

import numpy as np
import pytest

from covasym.core import derived_rng
from covasym.estimate import (
    ProcessSpec,
    ScalingFit,
    StatisticSeries,
    SupportError,
    VarianceCurve,
    fit_scaling,
    k_statistics,
    linear_statistic,
    series_from_csv,
    series_to_csv,
    summary_to_csv,
    variance_curve,
)
from covasym.expansion import gaussian_bump, indicator_box
from covasym.simulate import (
    BoxWindow,
    PointSample,
    sample_convolution_measure,
    sample_ginibre,
    sample_poisson,
)


@pytest.fixture()
def poisson_window():
    return BoxWindow((-1.0, -1.0), (9.0, 9.0))


class TestLinearStatistic:
    def test_indicator_counts_points(self, poisson_window):
        s = sample_poisson(1.0, poisson_window, 7)
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        val = linear_statistic(s, f, 5.0)
        inside = (
            (s.points[:, 0] >= 0)
            & (s.points[:, 0] <= 5)
            & (s.points[:, 1] >= 0)
            & (s.points[:, 1] <= 5)
        )
        assert val == float(np.count_nonzero(inside))

    def test_empty_sample(self, poisson_window):
        s = PointSample(
            dimension=2,
            window=poisson_window,
            points=np.empty((0, 2)),
            seed=0,
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        assert linear_statistic(s, f, 2.0) == 0.0

    def test_support_guard_rejects_with_required_radius(self, poisson_window):
        s = sample_poisson(1.0, poisson_window, 7)
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        with pytest.raises(SupportError) as err:
            linear_statistic(s, f, 50.0)
        # per-axis reach of the scaled support box
        assert err.value.required_radius == pytest.approx(50.0)

    def test_guard_can_be_waived_for_edge_studies(self):
        s = sample_ginibre(64, 3)
        f = gaussian_bump(2)
        with pytest.raises(SupportError):
            linear_statistic(s, f, 4.0)
        val = linear_statistic(s, f, 4.0, enforce_support=False)
        assert np.isfinite(val)

    def test_measure_sample_statistic(self):
        s = sample_convolution_measure(1, 40.0, 5)
        f = gaussian_bump(1)
        val = linear_statistic(s, f, 4.0)
        assert np.isfinite(val)
        # mean over seeds approximates L * int f = 4 sqrt(2 pi)
        vals = [
            linear_statistic(sample_convolution_measure(1, 40.0, 100 + i), f, 4.0)
            for i in range(100)
        ]
        se = np.std(vals, ddof=1) / 10.0
        assert np.mean(vals) == pytest.approx(4.0 * math.sqrt(2 * math.pi), abs=3 * se)

    def test_measure_support_guard(self):
        s = sample_convolution_measure(1, 10.0, 5)
        f = gaussian_bump(1)
        with pytest.raises(SupportError):
            linear_statistic(s, f, 4.0)


class TestFiniteEnsembleMean:
    def test_ginibre_gaussian_statistic_matches_finite_size_campbell(self):
        # exact finite-ensemble mean of sum exp(-|z|^2 / 2 L^2): the radial
        # density is a finite sum of Gamma layers, so the mean telescopes to
        # a geometric sum; the infinite-volume value 2 L^2 is its N -> inf
        # limit and is NOT reached at finite N (edge mass is missing)
        N, L, reps = 64, 3.0, 300
        b = 2 * L * L / (2 * L * L + 1)
        exact = b * (1 - b**N) / (1 - b)
        f = gaussian_bump(2)
        vals = np.array(
            [
                linear_statistic(
                    sample_ginibre(N, 40_000 + r), f, L, enforce_support=False
                )
                for r in range(reps)
            ]
        )
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert vals.mean() == pytest.approx(exact, abs=3 * se)
        # and the infinite-volume Campbell value is visibly NOT attained
        assert abs(vals.mean() - 2 * L * L) > 10 * se


class TestKStatistics:
    def test_constant_data_vanishing_cumulants(self):
        x = np.full(50, 2.5)
        assert k_statistics(x, 1) == 2.5
        assert k_statistics(x, 2) == 0.0
        assert k_statistics(x, 3) == 0.0
        assert k_statistics(x, 4) == 0.0

    def test_gaussian_higher_cumulants_vanish(self):
        rng = derived_rng(8)
        x = rng.standard_normal(100_000)
        assert abs(k_statistics(x, 3)) < 4.0 / math.sqrt(len(x)) * math.sqrt(6)
        assert abs(k_statistics(x, 4)) < 4.0 / math.sqrt(len(x)) * math.sqrt(24)

    def test_poisson_cumulants_all_equal_mean(self):
        rng = derived_rng(9)
        x = rng.poisson(5.0, 100_000).astype(float)
        for order in (2, 3):
            se = 5.0 * math.sqrt(30.0 / len(x))  # generous scale
            assert k_statistics(x, order) == pytest.approx(5.0, abs=5 * se + 0.2)

    def test_unbiasedness_of_k2_k3(self):
        # average the estimators over many tiny samples: bias ~ 0
        rng = derived_rng(10)
        k2s, k3s = [], []
        for _ in range(4000):
            x = rng.exponential(1.0, size=6)
            k2s.append(k_statistics(x, 2))
            k3s.append(k_statistics(x, 3))
        # exponential: kappa_2 = 1, kappa_3 = 2
        assert np.mean(k2s) == pytest.approx(1.0, abs=0.05)
        assert np.mean(k3s) == pytest.approx(2.0, abs=0.25)

    def test_degenerate_sizes_rejected(self):
        with pytest.raises(ValueError):
            k_statistics([1.0, 2.0], 3)
        with pytest.raises(ValueError):
            k_statistics([1.0] * 10, 5)


class TestVarianceCurve:
    def test_poisson_benchmark(self, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        curve = variance_curve(proc, f, [4.0, 8.0], replicates=3000, seed_base=100)
        for L, var, lo, hi in zip(
            curve.scales, curve.variances, curve.ci_lo, curve.ci_hi
        ):
            assert lo <= L * L <= hi  # exact Poisson variance lambda L^d

    def test_zero_function_gives_zero_curve(self, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        zero = indicator_box((100.0, 100.0), (101.0, 101.0))
        # support guard would reject: the box sits outside the window
        with pytest.raises(SupportError):
            variance_curve(proc, zero, [1.0], replicates=8, seed_base=0)

    def test_reproducible_from_one_seed(self, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        a = variance_curve(proc, f, [4.0], replicates=16, seed_base=5)
        b = variance_curve(proc, f, [4.0], replicates=16, seed_base=5)
        assert np.array_equal(a.series.values, b.series.values)

    def test_ci_width_shrinks_like_root_replicates(self, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        small = variance_curve(proc, f, [4.0], replicates=2500, seed_base=300)
        large = variance_curve(proc, f, [4.0], replicates=5000, seed_base=300)
        w_small = small.ci_hi[0] - small.ci_lo[0]
        w_large = large.ci_hi[0] - large.ci_lo[0]
        ratio = w_large / w_small
        assert 0.8 * math.sqrt(0.5) < ratio < 1.2 * math.sqrt(0.5)


class TestScalingFit:
    def _synthetic_curve(self, exponent, constant, scales, reps, seed):
        rng = derived_rng(seed)
        vals = np.stack(
            [
                math.sqrt(constant * L**exponent) * rng.standard_normal(reps)
                for L in scales
            ]
        )
        series = StatisticSeries("synthetic", "f", tuple(scales), vals, seed)
        variances = np.array([constant * L**exponent for L in scales])
        return VarianceCurve(series, variances, variances * 0.9, variances * 1.1)

    def test_exact_power_law_recovery(self):
        curve = self._synthetic_curve(1.0, 3.0, [4.0, 8.0, 16.0], 64, 11)
        fit = fit_scaling(curve)
        assert fit.exponent == pytest.approx(1.0, abs=1e-10)
        assert fit.constant == pytest.approx(3.0, rel=1e-10)
        assert fit.residual_rms < 1e-12

    def test_poisson_scaling_exponent(self, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        curve = variance_curve(
            proc, f, [2.0, 4.0, 6.0], replicates=4000, seed_base=700
        )
        fit = fit_scaling(curve)
        assert fit.exponent == pytest.approx(2.0, abs=0.1)

    def test_nonpositive_variances_excluded_with_warning(self):
        curve = self._synthetic_curve(1.0, 3.0, [4.0, 8.0, 16.0, 32.0], 32, 12)
        bad = VarianceCurve(
            curve.series,
            np.array([3.0 * 4.0, -1.0, 3.0 * 16.0, 3.0 * 32.0]),
            curve.ci_lo,
            curve.ci_hi,
        )
        with pytest.warns(UserWarning):
            fit = fit_scaling(bad)
        assert len(fit.scales_used) == 3

    def test_too_few_scales_rejected(self):
        curve = self._synthetic_curve(1.0, 3.0, [4.0, 8.0], 32, 13)
        with pytest.raises(ValueError):
            fit_scaling(curve)


class TestCsvFormats:
    def test_series_round_trip(self, tmp_path, poisson_window):
        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        curve = variance_curve(proc, f, [2.0, 4.0], replicates=16, seed_base=3)
        path = tmp_path / "series.csv"
        series_to_csv(curve.series, path)
        back = series_from_csv(path)
        assert set(back) == {2.0, 4.0}
        assert np.allclose(back[2.0], curve.series.values[0])

    def test_summary_round_trip(self, tmp_path, poisson_window):
        from covasym.estimate import summary_from_csv

        proc = ProcessSpec(
            "poisson", lambda seed: sample_poisson(1.0, poisson_window, seed)
        )
        f = indicator_box((0.0, 0.0), (1.0, 1.0))
        curve = variance_curve(proc, f, [2.0], replicates=16, seed_base=3)
        path = tmp_path / "summary.csv"
        summary_to_csv(curve, path)
        rows = summary_from_csv(path)
        assert rows[0]["L"] == 2.0
        assert rows[0]["n"] == 16
        assert rows[0]["variance"] == pytest.approx(curve.variances[0], rel=1e-11)
