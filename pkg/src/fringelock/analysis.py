"""Fringe visibility extraction from binned count records.

Visibility is estimated without fitting: a sliding window picks up the local
fringe extremes of the dark-subtracted counts, and

    V_i = |(upper_i - lower_i) / (upper_i + lower_i)|

is evaluated per bin.  The window must be long enough to contain at least one
full fringe sweep, otherwise the envelope hugs the signal and V collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import CountSeries


def compute_envelope(series: CountSeries, window_s: float) -> tuple[np.ndarray, np.ndarray]:
    """Sliding max/min of the net counts, centred, truncated at the edges.

    Returns (upper, lower), same length as the series.  The window covers
    `window_s` seconds (an odd number of bins, at least 3).
    """
    n = len(series)
    if n == 0:
        raise ValueError("compute_envelope: empty series")
    half = int(round(window_s / series.bin_s)) // 2
    if half < 1:
        raise ValueError("compute_envelope: window must span at least 3 bins")
    net = series.net
    upper = np.empty(n)
    lower = np.empty(n)
    width = 2 * half + 1
    if n >= width:
        view = np.lib.stride_tricks.sliding_window_view(net, width)
        upper[half : n - half] = view.max(axis=1)
        lower[half : n - half] = view.min(axis=1)
    interior_lo = min(half, n)
    for i in range(interior_lo):
        upper[i] = net[: i + half + 1].max()
        lower[i] = net[: i + half + 1].min()
    for i in range(max(n - half, interior_lo), n):
        upper[i] = net[i - half :].max()
        lower[i] = net[i - half :].min()
    return upper, lower


def visibility_series(
    upper: np.ndarray, lower: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin visibility from envelope arrays.

    Bins whose envelope sum is not positive carry no fringe information and
    are flagged invalid (V set to nan).  A lower envelope pushed below zero
    by dark-count subtraction can only inflate V past 1, so values are
    clipped back into [0, 1].
    """
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    if upper.shape != lower.shape:
        raise ValueError("visibility_series: mismatched envelope arrays")
    total = upper + lower
    valid = total > 0
    v = np.full(upper.shape, np.nan)
    np.divide(np.abs(upper - lower), total, out=v, where=valid)
    np.clip(v, 0.0, 1.0, out=v)
    v[~valid] = np.nan
    return v, valid


def visibility_histogram(
    visibility: np.ndarray, valid: np.ndarray, bin_width: float
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of the valid visibility samples over [0, 1].

    Returns (edges, counts) with len(edges) = len(counts) + 1.  The total of
    `counts` equals the number of valid samples.
    """
    if not (0.0 < bin_width <= 1.0):
        raise ValueError("visibility_histogram: bin_width must be in (0, 1]")
    n_bins = int(math.ceil(1.0 / bin_width - 1e-12))
    edges = np.minimum(np.arange(n_bins + 1) * bin_width, 1.0)
    values = np.asarray(visibility, dtype=float)[np.asarray(valid, dtype=bool)]
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


@dataclass
class VisibilityStats:
    """Envelope, per-bin visibility and summary numbers for one record."""

    window_s: float
    upper: np.ndarray
    lower: np.ndarray
    visibility: np.ndarray
    valid: np.ndarray
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    mean: float
    std: float

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())


def analyze_counts(
    series: CountSeries, window_s: float, hist_bin: float = 0.01
) -> VisibilityStats:
    """Envelope visibility analysis of one count record."""
    upper, lower = compute_envelope(series, window_s)
    v, valid = visibility_series(upper, lower)
    edges, counts = visibility_histogram(v, valid, hist_bin)
    if valid.any():
        mean = float(np.nanmean(v[valid]))
        std = float(np.nanstd(v[valid]))
    else:
        mean = math.nan
        std = math.nan
    return VisibilityStats(
        window_s=window_s,
        upper=upper,
        lower=lower,
        visibility=v,
        valid=valid,
        hist_edges=edges,
        hist_counts=counts,
        mean=mean,
        std=std,
    )
