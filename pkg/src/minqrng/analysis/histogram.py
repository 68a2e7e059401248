"""Waiting-time histograms and their exponential fit."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, FitError

CLOCK_PERIOD_NS = 16.0
DEFICIT_THRESHOLD = 0.95
MIN_FIT_COUNT = 10


@dataclass(frozen=True)
class HistogramFit:
    bin_width: int  # ticks
    bin_start: np.ndarray  # ticks
    counts: np.ndarray
    expected: np.ndarray
    fitted_rate: float  # per second
    deviation_boundary: float  # ns
    fit_start: float  # ns
    clock_period: float = CLOCK_PERIOD_NS

    @property
    def bin_start_ns(self) -> np.ndarray:
        return self.bin_start * self.clock_period

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.expected > 0, self.counts / self.expected, np.nan)


def _fit_log_linear(x, counts):
    """Count-weighted least squares of log(count) on x; returns (intercept, slope)."""
    w = counts.astype(float)
    y = np.log(counts)
    W = w.sum()
    xm = (w * x).sum() / W
    ym = (w * y).sum() / W
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0:
        raise FitError("all populated bins coincide; exponential fit is degenerate")
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    return ym - slope * xm, slope


def _leading_deficit(ratio, threshold):
    """Number of leading bins whose observed/expected ratio is below ``threshold``."""
    n = 0
    while n < ratio.size and ratio[n] < threshold:
        n += 1
    return n


def waiting_time_histogram(
    intervals,
    bin_width: int = 1,
    clock_period: float = CLOCK_PERIOD_NS,
    threshold: float = DEFICIT_THRESHOLD,
    min_count: int = MIN_FIT_COUNT,
    max_iter: int = 20,
) -> HistogramFit:
    """Histogram interval samples (ticks) and fit an exponential tail.

    The fit covers bins beyond twice the deviation boundary, and the
    boundary is the upper edge of the leading run of bins that fall short
    of the fitted curve by more than ``1 - threshold``. The two depend on
    each other, so they are iterated to a fixed point starting from a fit
    over every populated bin.
    """
    intervals = np.asarray(intervals, dtype=np.int64)
    if intervals.size == 0:
        raise EmptyInputError("waiting_time_histogram needs at least one interval")
    lo = max(int(intervals.min()), 1)
    nbins = (int(intervals.max()) - lo) // bin_width + 1
    counts = np.bincount((intervals - lo) // bin_width, minlength=nbins)
    start = lo + bin_width * np.arange(nbins)
    center_ns = (start + (bin_width - 1) / 2) * clock_period

    populated = counts >= min_count
    if populated.sum() < 2:
        raise FitError("fewer than two populated bins; exponential fit is degenerate")

    first_fit_bin = 0
    boundary_bins = 0
    for _ in range(max_iter):
        mask = populated.copy()
        mask[:first_fit_bin] = False
        if mask.sum() < 2:
            raise FitError("too few populated bins beyond the deviation boundary")
        intercept, slope = _fit_log_linear(center_ns[mask], counts[mask])
        if slope >= 0:
            raise FitError("histogram does not decay; no exponential fit")
        expected = np.exp(intercept + slope * center_ns)
        new_boundary = _leading_deficit(counts / expected, threshold)
        edge = start[new_boundary - 1] + bin_width if new_boundary else 0
        new_first = int(np.searchsorted(start, 2 * edge))
        if new_boundary == boundary_bins and new_first == first_fit_bin:
            break
        boundary_bins, first_fit_bin = new_boundary, new_first

    boundary_ns = 0.0 if boundary_bins == 0 else float(start[boundary_bins - 1] + bin_width) * clock_period
    return HistogramFit(
        bin_width=bin_width,
        bin_start=start,
        counts=counts,
        expected=expected,
        fitted_rate=float(-slope * 1e9),
        deviation_boundary=boundary_ns,
        fit_start=float(start[first_fit_bin]) * clock_period,
        clock_period=clock_period,
    )


def deficit_time_constant(fit: HistogramFit, min_deficit: float = 0.02) -> float:
    """Decay constant (ns) of the relative shortfall 1 - observed/expected.

    Uses the leading bins where the shortfall exceeds ``min_deficit``.
    """
    deficit = 1 - fit.ratio
    n = 0
    while n < deficit.size and deficit[n] > min_deficit:
        n += 1
    if n < 2:
        raise FitError("not enough deficient bins to fit a decay constant")
    x = (fit.bin_start[:n] + (fit.bin_width - 1) / 2) * fit.clock_period
    slope, _ = np.polyfit(x, np.log(deficit[:n]), 1)
    if slope >= 0:
        raise FitError("shortfall does not decay")
    return float(-1 / slope)


def tail_rate_mle(intervals, start_ticks: int, clock_period: float = CLOCK_PERIOD_NS) -> float:
    """Rate (per second) from the mean excess of intervals beyond ``start_ticks``.

    Geometric tails are memoryless, so the excess over any threshold has
    the same law; its mean gives the rate without any binning.
    """
    intervals = np.asarray(intervals, dtype=np.int64)
    tail = intervals[intervals >= start_ticks] - start_ticks
    if tail.size == 0:
        raise EmptyInputError("no intervals beyond the requested start")
    q = tail.mean() / (1 + tail.mean())  # geometric on {0, 1, ...}: mean = q / (1 - q)
    return float(-np.log(q) / (clock_period * 1e-9))


def histogram_csv(fit: HistogramFit) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_start_ns", "count", "expected"])
    for s, c, e in zip(fit.bin_start_ns, fit.counts, fit.expected):
        writer.writerow([f"{s:g}", int(c), f"{e:.3f}"])
    return buf.getvalue()
