"""Tests for circular histograms, moments and peak finding."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.histogram import CircularHistogram
from modules.circular_stats import (
    accumulate,
    background_flatness,
    bin_centers,
    bin_index,
    circular_mean,
    circular_variance,
    exclude,
    find_peaks,
    from_samples,
    into_range,
    merge,
    peak_mass_fraction,
    probabilities,
)
from modules.core import wrap_phase
from modules.errors import EmptyDistribution

phases = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@settings(max_examples=50)
@given(samples=st.lists(st.one_of(phases, st.just(math.nan)), max_size=60), n_bins=st.integers(2, 64))
def test_every_sample_is_binned_or_excluded(samples, n_bins):
    h = from_samples(samples, n_bins)
    assert h.n_total == len(samples)
    assert h.n_excluded == sum(math.isnan(x) for x in samples)
    assert sum(h.counts) == h.n_samples


@settings(max_examples=50)
@given(first=st.lists(phases, max_size=30), second=st.lists(phases, max_size=30))
def test_merge_equals_binning_everything_at_once(first, second):
    merged = merge(from_samples(first, 16), from_samples(second, 16))
    together = from_samples(first + second, 16)
    assert merged.counts == together.counts
    assert merged.n_total == together.n_total
    assert merged.resultant_re == pytest.approx(together.resultant_re, abs=1e-9)


def test_merge_needs_matching_bins():
    with pytest.raises(ValueError):
        merge(CircularHistogram.empty(8), CircularHistogram.empty(16))


def test_bin_edges_are_half_open():
    h = CircularHistogram.empty(4)
    assert list(bin_index(h, [-math.pi, math.pi, 1e-9, -3.0])) == [3, 3, 2, 0]
    np.testing.assert_allclose(bin_centers(h), [-0.75 * math.pi, -0.25 * math.pi, 0.25 * math.pi, 0.75 * math.pi])


def test_narrow_range_shifts_by_whole_turns():
    low, high = 1.25 * math.pi, 1.5 * math.pi
    assert float(into_range(-0.6 * math.pi, low, high)) == pytest.approx(1.4 * math.pi)
    assert float(into_range(high + 1e-12, low, high)) == high
    with pytest.raises(ValueError):
        into_range(0.0, low, high)
    with pytest.raises(ValueError):
        into_range(math.inf, -math.pi, math.pi)


def test_point_mass_moments():
    h = from_samples([3.0] * 10, 32)
    assert circular_mean(h) == pytest.approx(3.0)
    assert circular_variance(h) == pytest.approx(0.0, abs=1e-12)


def test_uniform_spread_has_unit_variance():
    h = from_samples(2 * math.pi * np.arange(100) / 100, 50)
    assert circular_variance(h) == pytest.approx(1.0, abs=1e-12)
    assert probabilities(h).sum() == pytest.approx(1.0)


def test_moments_ignore_binning():
    samples = np.random.default_rng(1).vonmises(0.5, 4.0, size=500)
    coarse, fine = from_samples(samples, 8), from_samples(samples, 400)
    assert circular_mean(coarse) == pytest.approx(circular_mean(fine), abs=1e-12)
    assert circular_variance(coarse) == pytest.approx(circular_variance(fine), abs=1e-12)


def test_empty_distribution_has_no_moments():
    h = exclude(accumulate(CircularHistogram.empty(8), math.nan), 2)
    assert h.n_total == 3
    assert h.n_excluded == 3
    with pytest.raises(EmptyDistribution):
        circular_mean(h)
    with pytest.raises(EmptyDistribution):
        circular_variance(h)
    assert find_peaks(h, 0.01) == []


def test_narrow_mean_stays_in_the_display_range():
    h = from_samples([1.4 * math.pi, 1.45 * math.pi], 20, 1.25 * math.pi, 1.5 * math.pi)
    assert circular_mean(h) == pytest.approx(1.425 * math.pi)


def _clustered(rng):
    return np.concatenate(
        [
            rng.normal(1.0, 0.05, 30_000),
            rng.normal(-2.0, 0.05, 10_000),
            rng.uniform(-math.pi, math.pi, 20_000),
        ]
    )


def test_peaks_are_found_largest_mass_first():
    h = from_samples(_clustered(np.random.default_rng(2)), 200)
    peaks = find_peaks(h, min_prominence=0.02)
    assert len(peaks) >= 2
    assert peaks[0].center == pytest.approx(1.0, abs=0.05)
    assert any(abs(peak.center + 2.0) < 0.05 for peak in peaks)
    assert peaks[0].mass > peaks[1].mass
    assert peak_mass_fraction(h, 1.0, 0.2) > 0.45


def test_peak_across_the_seam_is_found_once():
    samples = wrap_phase(np.random.default_rng(3).normal(math.pi, 0.05, 20_000))
    peaks = find_peaks(from_samples(samples, 200), min_prominence=0.02)
    assert len(peaks) == 1
    assert abs(wrap_phase(peaks[0].center - math.pi)) < 0.05
    assert peaks[0].mass > 0.5


def test_peak_in_an_edge_bin_of_a_narrow_range():
    low, high = 1.25 * math.pi, 1.5 * math.pi
    samples = [high] * 50 + list(np.linspace(low + 0.01, high - 0.1, 50))
    peaks = find_peaks(from_samples(samples, 40, low, high), min_prominence=0.05)
    assert peaks
    assert peaks[0].center > high - 0.03


def test_background_flatness():
    rng = np.random.default_rng(4)
    flat = from_samples(rng.uniform(-math.pi, math.pi, 100_000), 200)
    chi2, p_value = background_flatness(flat, [])
    assert chi2 < 1.5
    assert 0.0 <= p_value <= 1.0

    clustered = from_samples(_clustered(rng), 200)
    peaks = find_peaks(clustered, min_prominence=0.02)
    chi2_all, _ = background_flatness(clustered, [])
    chi2_off_peak, _ = background_flatness(clustered, peaks, guard_bins=10)
    assert chi2_off_peak < chi2_all

    with pytest.raises(EmptyDistribution):
        background_flatness(CircularHistogram.empty(8), [])
