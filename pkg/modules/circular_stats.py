"""
Circular statistics on binned phase distributions.

Histograms are immutable; every update returns a new CircularHistogram. Moments
are taken from the running resultant vector, so they do not depend on binning.
"""

import logging
import math
from collections.abc import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import signal, stats

from models.histogram import CircularHistogram, Peak
from modules.errors import EmptyDistribution

logger = logging.getLogger(__name__)

RANGE_SLACK = 1e-9
PEAK_REL_HEIGHT = 0.9
BACKGROUND_GUARD_BINS = 3


def into_range(x: ArrayLike, low: float, high: float) -> NDArray[np.float64]:
    """
    Map angles into a display range.

    Full-circle ranges are treated modulo 2pi onto (low, high]. Narrower ranges
    shift each value by whole turns towards the range and clip values within
    RANGE_SLACK of an edge.

    Raises:
        ValueError: If a value is not finite or lies outside a narrow range
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot bin a non-finite phase")
    width = high - low
    if math.isclose(width, 2 * math.pi):
        return high - np.mod(high - arr, 2 * math.pi)
    center = 0.5 * (low + high)
    shifted = arr - 2 * math.pi * np.round((arr - center) / (2 * math.pi))
    outside = (shifted < low - RANGE_SLACK) | (shifted > high + RANGE_SLACK)
    if np.any(outside):
        raise ValueError(f"phase {shifted[outside][0]:.6f} outside the display range [{low}, {high}]")
    return np.clip(shifted, low, high)


def bin_index(h: CircularHistogram, x: ArrayLike) -> NDArray[np.int64]:
    """Bins are (low + i w, low + (i + 1) w]; the lower edge itself goes to bin 0."""
    values = into_range(x, h.low, h.high)
    index = np.ceil((values - h.low) / h.bin_width).astype(np.int64) - 1
    return np.clip(index, 0, h.n_bins - 1)


def bin_centers(h: CircularHistogram) -> NDArray[np.float64]:
    return h.low + h.bin_width * (np.arange(h.n_bins) + 0.5)


def probabilities(h: CircularHistogram) -> NDArray[np.float64]:
    """Fraction of binned samples in each bin (all zeros for an empty histogram)."""
    counts = np.asarray(h.counts, dtype=np.float64)
    if h.n_samples == 0:
        return counts
    return counts / h.n_samples


def accumulate_many(h: CircularHistogram, samples: Iterable[float] | ArrayLike) -> CircularHistogram:
    """
    Add samples to the histogram.

    NaN samples count as exclusions; every other sample must be finite.
    """
    if not isinstance(samples, np.ndarray):
        samples = list(samples)
    values = np.asarray(samples, dtype=np.float64).ravel()
    excluded = np.isnan(values)
    kept = values[~excluded]
    counts = np.asarray(h.counts, dtype=np.int64)
    if kept.size:
        counts = counts + np.bincount(bin_index(h, kept), minlength=h.n_bins)
    return h.model_copy(
        update={
            "counts": counts.tolist(),
            "n_total": h.n_total + values.size,
            "n_excluded": h.n_excluded + int(np.count_nonzero(excluded)),
            "resultant_re": h.resultant_re + float(np.sum(np.cos(kept))),
            "resultant_im": h.resultant_im + float(np.sum(np.sin(kept))),
        }
    )


def accumulate(h: CircularHistogram, sample: float) -> CircularHistogram:
    return accumulate_many(h, [sample])


def exclude(h: CircularHistogram, count: int = 1) -> CircularHistogram:
    """Record singular samples that never reach a bin."""
    if count < 0:
        raise ValueError(f"exclusion count must be non-negative, got {count}")
    return h.model_copy(
        update={"n_total": h.n_total + count, "n_excluded": h.n_excluded + count}
    )


def from_samples(
    samples: ArrayLike, n_bins: int, low: float = -math.pi, high: float = math.pi
) -> CircularHistogram:
    """Histogram of phases; NaN samples are counted as exclusions."""
    return accumulate_many(CircularHistogram.empty(n_bins, low, high), np.asarray(samples, float))


def merge(h1: CircularHistogram, h2: CircularHistogram) -> CircularHistogram:
    """Combine two histograms over the same bins."""
    if h1.n_bins != h2.n_bins or h1.low != h2.low or h1.high != h2.high:
        raise ValueError("histograms must share bins to be merged")
    return CircularHistogram(
        counts=[a + b for a, b in zip(h1.counts, h2.counts, strict=True)],
        low=h1.low,
        high=h1.high,
        n_total=h1.n_total + h2.n_total,
        n_excluded=h1.n_excluded + h2.n_excluded,
        resultant_re=h1.resultant_re + h2.resultant_re,
        resultant_im=h1.resultant_im + h2.resultant_im,
    )


def circular_mean(h: CircularHistogram) -> float:
    """
    Argument of the resultant vector.

    Returns:
        Mean phase; for narrow display ranges shifted by whole turns towards the range

    Raises:
        EmptyDistribution: If no sample was binned
    """
    if h.n_samples == 0:
        raise EmptyDistribution("circular mean of an empty distribution")
    mean = h.mean_phase
    if h.full_circle:
        return float(into_range(mean, h.low, h.high))
    center = 0.5 * (h.low + h.high)
    return mean - 2 * math.pi * round((mean - center) / (2 * math.pi))


def circular_variance(h: CircularHistogram) -> float:
    """
    1 - |R| / n over binned samples; 0 for a point mass, 1 for a uniform spread.

    Raises:
        EmptyDistribution: If no sample was binned
    """
    if h.n_samples == 0:
        raise EmptyDistribution("circular variance of an empty distribution")
    return h.circ_variance


def find_peaks(
    h: CircularHistogram, min_prominence: float, rel_height: float = PEAK_REL_HEIGHT
) -> list[Peak]:
    """
    Local maxima of the probability profile, largest mass first.

    Full-circle histograms are tiled three times so peaks straddling the seam are
    found once, in the middle copy; narrow ranges are zero padded. A peak's mass sums the bins inside its width
    measured at ``rel_height`` of its prominence.

    Args:
        h: Histogram
        min_prominence: Minimal prominence in probability units
        rel_height: Relative height at which the peak extent is measured

    Returns:
        Peaks sorted by decreasing mass
    """
    if h.n_samples == 0:
        return []
    probs = probabilities(h)
    n = h.n_bins
    if h.full_circle:
        profile, offset = np.concatenate([probs, probs, probs]), n
    else:
        # Zero padding lets a maximum in an edge bin register as a peak.
        profile, offset = np.concatenate([[0.0], probs, [0.0]]), 1

    indices, props = signal.find_peaks(profile, prominence=min_prominence)
    keep = (indices >= offset) & (indices < offset + n)
    indices = indices[keep]
    if indices.size == 0:
        return []
    prominences = props["prominences"][keep]
    _, _, left, right = signal.peak_widths(profile, indices, rel_height=rel_height)

    centers = bin_centers(h)
    peaks = []
    for index, prominence, lo, hi in zip(indices, prominences, left, right, strict=True):
        span = np.arange(int(math.floor(lo + 0.5)), int(math.ceil(hi - 0.5)) + 1)
        span = span[(span >= 0) & (span < len(profile))]
        mass = float(np.sum(profile[span])) if span.size else float(profile[index])
        peaks.append(
            Peak(
                center=float(centers[index - offset]),
                mass=min(1.0, mass),
                height=float(profile[index]),
                prominence=float(prominence),
            )
        )
    peaks.sort(key=lambda peak: peak.mass, reverse=True)
    logger.debug(f"found {len(peaks)} peaks with prominence >= {min_prominence}")
    return peaks


def _circular_distance(a: NDArray[np.float64], b: float) -> NDArray[np.float64]:
    return np.abs(np.pi - np.mod(np.pi - (a - b), 2 * np.pi))


def peak_mass_fraction(h: CircularHistogram, center: float, half_width: float) -> float:
    """Fraction of binned samples whose bin center lies within half_width of center."""
    if h.n_samples == 0:
        raise EmptyDistribution("peak mass of an empty distribution")
    inside = _circular_distance(bin_centers(h), center) <= half_width + RANGE_SLACK
    return float(np.sum(probabilities(h)[inside]))


def background_flatness(
    h: CircularHistogram, peaks: Sequence[Peak], guard_bins: int = BACKGROUND_GUARD_BINS
) -> tuple[float, float]:
    """
    Chi-square test of the off-peak bins against a uniform background.

    Args:
        h: Histogram
        peaks: Peaks whose neighbourhoods are left out
        guard_bins: Bins on each side of a peak center that are left out

    Returns:
        (chi-square per degree of freedom, p-value); smaller means flatter
    """
    counts = np.asarray(h.counts, dtype=np.float64)
    centers = bin_centers(h)
    mask = np.ones(h.n_bins, dtype=bool)
    for peak in peaks:
        mask &= _circular_distance(centers, peak.center) > (guard_bins + 0.5) * h.bin_width
    observed = counts[mask]
    if observed.size < 2 or observed.sum() == 0:
        raise EmptyDistribution("no background samples left outside the peaks")
    result = stats.chisquare(observed)
    return float(result.statistic) / (observed.size - 1), float(result.pvalue)
