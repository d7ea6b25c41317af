import math

import numpy as np
import pytest
import scipy.stats as stats

from qrisk.errors import DegenerateSeriesError, InsufficientSampleError
from qrisk.randtest import (
    BatteryConfig,
    autocorrelation,
    binned_entropy,
    chi2_sf,
    chi_square_uniformity,
    ks_uniform,
    run_battery,
)
from qrisk.sources import MockBitSource, RandomSourceDescriptor, draw_uniform_samples
from qrisk.bits import BitBuffer, bits_to_uniform, von_neumann_extract


def samples_with_counts(counts):
    """Uniform samples placed to land exactly `counts[i]` in bin i of 4."""
    out = []
    for i, c in enumerate(counts):
        out.extend([i / 4 + 0.1] * c)
    return np.array(out)


class TestChi2Sf:
    def test_against_library(self):
        for stat in (0.1, 4.0, 30.0, 300.0, 1500.0):
            for dof in (1, 3, 50, 255):
                assert chi2_sf(stat, dof) == pytest.approx(
                    stats.chi2.sf(stat, dof), abs=1e-12)

    def test_zero_statistic(self):
        assert chi2_sf(0.0, 5) == 1.0


class TestChiSquare:
    def test_perfect_uniformity(self):
        stat, dof, p = chi_square_uniformity(samples_with_counts([25] * 4), 4)
        assert stat == 0.0
        assert dof == 3
        assert p == pytest.approx(1.0)

    def test_hand_sum(self):
        stat, _, _ = chi_square_uniformity(
            samples_with_counts([30, 20, 30, 20]), 4)
        assert stat == pytest.approx(4.0)

    def test_concentrated(self):
        stat, _, _ = chi_square_uniformity(
            samples_with_counts([100, 0, 0, 0]), 4)
        assert stat == pytest.approx(300.0)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSampleError):
            chi_square_uniformity(np.linspace(0, 0.99, 19), 4)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        x = rng.random(1000)
        a = chi_square_uniformity(x, 8)
        b = chi_square_uniformity(rng.permutation(x), 8)
        assert a == b


class TestKs:
    def test_single_midpoint(self):
        assert ks_uniform([0.5]) == pytest.approx(0.5)

    def test_two_points(self):
        assert ks_uniform([0.25, 0.75]) == pytest.approx(0.25)

    def test_conforming_million(self):
        rng = np.random.default_rng(2024)
        assert ks_uniform(rng.random(1_000_000)) < 1.63 / 1000.0

    def test_empty(self):
        with pytest.raises(InsufficientSampleError):
            ks_uniform([])

    def test_bounded(self):
        rng = np.random.default_rng(1)
        d = ks_uniform(rng.random(100) ** 3)
        assert 0.0 <= d <= 1.0


class TestAutocorrelation:
    def test_constant_series(self):
        with pytest.raises(DegenerateSeriesError):
            autocorrelation(np.full(100, 0.3), 1)

    def test_alternating_closed_form(self):
        n = 1000
        x = np.tile([1.0, -1.0], n // 2)
        (_, r1), = autocorrelation(x, 1)
        assert r1 == pytest.approx(-(n - 1) / n)  # -0.999

    def test_iid_uniforms_within_band(self):
        rng = np.random.default_rng(77)
        lags = autocorrelation(rng.random(100_000), 1)
        assert abs(lags[0][1]) < 3.0 / math.sqrt(100_000)

    def test_too_short(self):
        with pytest.raises(InsufficientSampleError):
            autocorrelation([0.1, 0.2], 5)


class TestEntropy:
    def test_even_two_bins(self):
        x = np.array([0.1] * 50 + [0.9] * 50)
        assert binned_entropy(x, 2) == pytest.approx(1.0)

    def test_single_bin(self):
        assert binned_entropy(np.full(10, 0.2), 4) == 0.0

    def test_distinct_bins(self):
        n = 8
        x = (np.arange(n) + 0.5) / n
        assert binned_entropy(x, n) == pytest.approx(math.log2(n))

    def test_never_exceeds_log_bins(self):
        rng = np.random.default_rng(0)
        for bins in (2, 16, 64):
            assert binned_entropy(rng.random(5_000), bins) <= math.log2(bins) + 1e-12


class TestBattery:
    def test_conforming_pseudo_passes(self):
        batch = draw_uniform_samples(
            RandomSourceDescriptor("p", "pseudo", {"seed": 7}), 1_000_000)
        report = run_battery(batch.values, "p")
        assert report.verdict["overall"] is True
        assert 0.0 <= report.chi_square["p_value"] <= 1.0
        assert all(abs(r) <= 1.0 for _, r in report.autocorr)

    def test_biased_mock_fails_chi_square(self):
        batch = draw_uniform_samples(
            RandomSourceDescriptor("m", "mock", {"seed": 3, "p": 0.6}), 10_000)
        report = run_battery(batch.values, "m")
        assert report.verdict["chi_square"] is False
        assert report.verdict["overall"] is False

    def test_extraction_rescues_biased_mock(self):
        raw = MockBitSource(11, 0.6).take(1_000_000)
        extracted = von_neumann_extract(BitBuffer(raw, "m"))
        batch = bits_to_uniform(extracted)
        report = run_battery(batch.values, "m+vn")
        assert report.verdict["overall"] is True

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        x = rng.random(50_000)
        a = run_battery(x, "s")
        b = run_battery(x.copy(), "s")
        assert a.chi_square == b.chi_square
        assert a.verdict == b.verdict

    def test_entropy_bounded_by_bins(self):
        rng = np.random.default_rng(9)
        report = run_battery(rng.random(20_000), "s")
        assert report.entropy_bits <= math.log2(report.entropy_bins) + 1e-12

    def test_subtest_error_annotated(self):
        with pytest.raises(InsufficientSampleError, match="chi-square"):
            run_battery(np.linspace(0, 0.99, 100), "s")

    def test_config_bins(self):
        rng = np.random.default_rng(4)
        report = run_battery(rng.random(10_000), "s",
                             config=BatteryConfig(chi_square_bins=64))
        assert report.chi_square["dof"] == 63
