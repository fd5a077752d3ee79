"""Spectral summaries of system matrices and bolus-velocity thresholds.

The envelope used here ("hull") is a sliding forward-window maximum,
``hull(k) = max(m[k], ..., m[k + window])``.  It is not a convex hull; it
upper-bounds the spectrum at every bin and flat-tops isolated peaks across
the window width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

HULL_WINDOW = 15
PEAK_THRESHOLD = 0.1


def max_spectrum(S_hat) -> np.ndarray:
    """Per-bin maximum of column magnitudes, ``m(k) = max_i |S_hat(k, i)|``.

    Accepts an (n_K, R) matrix; extra leading channel axes are kept.
    """
    S_hat = np.asarray(S_hat)
    if S_hat.ndim < 2:
        raise ValueError("expected a (bins, voxels) matrix")
    if S_hat.shape[-1] == 0:
        return np.zeros(S_hat.shape[:-1])
    return np.max(np.abs(S_hat), axis=-1)


def hull_approximation(m, window: int = HULL_WINDOW) -> np.ndarray:
    """Sliding forward-window maximum over ``window`` following bins."""
    if window < 1:
        raise ValueError("window must be >= 1")
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return m.copy()
    padded = np.concatenate((m, np.full(window, m[-1])))
    return np.lib.stride_tricks.sliding_window_view(padded, window + 1).max(axis=-1)


def peak_spacing(m, threshold: float = PEAK_THRESHOLD, min_distance: int = 1):
    """Median gap (bins) between local maxima above ``threshold`` of the global max.

    Maxima closer than ``min_distance`` bins are merged (the taller wins).
    Returns None with fewer than two peaks.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0 or not np.max(m) > 0:
        return None
    padded = np.concatenate(([-np.inf], m, [-np.inf]))
    idx, _ = find_peaks(padded, height=threshold * np.max(m), distance=max(1, int(min_distance)))
    idx = idx - 1
    if len(idx) < 2:
        return None
    return float(np.median(np.diff(idx)))


def fwhm(hull) -> float:
    """Width in bins of the main lobe at half the global maximum.

    Crossings are located by linear interpolation on both flanks of the
    contiguous region above half maximum that contains the global maximum.
    """
    h = np.asarray(hull, dtype=float)
    if h.size == 0 or not np.max(h) > 0:
        return 0.0
    k0 = int(np.argmax(h))
    half = 0.5 * h[k0]
    lo = k0
    while lo > 0 and h[lo - 1] >= half:
        lo -= 1
    hi = k0
    while hi < h.size - 1 and h[hi + 1] >= half:
        hi += 1
    left = float(lo)
    if lo > 0:
        left = lo - (h[lo] - half) / (h[lo] - h[lo - 1])
    right = float(hi)
    if hi < h.size - 1:
        right = hi + (h[hi] - half) / (h[hi] - h[hi + 1])
    return right - left


def peak_metrics(m, window: int = HULL_WINDOW, threshold: float = PEAK_THRESHOLD, min_distance: int = 1):
    """(spacing in bins or None, FWHM of the hull in bins)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0 or not np.max(m) > 0:
        raise ValueError("peak metrics need a nonzero spectrum")
    return peak_spacing(m, threshold, min_distance), fwhm(hull_approximation(m, window))


@dataclass(frozen=True, eq=False)
class SpectrumSummary:
    bins: np.ndarray
    m: np.ndarray
    hull: np.ndarray
    spacing: float | None  # raw spectrum peaks
    hull_spacing: float | None  # peaks of the hull
    fwhm: float
    global_max: float


def summarize_spectrum(
    S_hat,
    window: int = HULL_WINDOW,
    threshold: float = PEAK_THRESHOLD,
    min_distance: int | None = None,
    skip_dc: bool = True,
) -> SpectrumSummary:
    """Max-over-voxel spectrum of one (n_K, R) matrix over bins 0..n_K/2.

    ``skip_dc`` drops bin 0 before the shape analysis (the mean of the
    magnetization dominates it and is not part of the harmonic pattern).
    ``min_distance`` merges split peak clusters; default window // 3.
    """
    S_hat = np.asarray(S_hat)
    n_K = S_hat.shape[0]
    first = 1 if skip_dc else 0
    bins = np.arange(first, n_K // 2 + 1)
    m = max_spectrum(S_hat)[bins]
    hull = hull_approximation(m, window)
    if not np.max(m, initial=0.0) > 0:
        return SpectrumSummary(bins, m, hull, None, None, 0.0, 0.0)
    dist = max(1, window // 3) if min_distance is None else min_distance
    return SpectrumSummary(
        bins,
        m,
        hull,
        peak_spacing(m, threshold, dist),
        peak_spacing(hull, threshold, dist),
        fwhm(hull),
        float(np.max(m)),
    )


def hull_distance(h1, h2) -> float:
    """L2 distance between unit-max versions of two hulls, relative to sqrt(n)."""
    a = np.asarray(h1, float)
    b = np.asarray(h2, float)
    a = a / np.max(a)
    b = b / np.max(b)
    return float(np.linalg.norm(a - b) / np.sqrt(a.size))


def bolus_velocity(voxel_len: float, peak_duration: float, c_max: float, cdot_max: float):
    """Average and peak-slope velocity thresholds of a bolus.

    ``v_av = voxel_len / (peak_duration / 2)``: one voxel traversed during
    the rise of a symmetric peak.  ``v_max = voxel_len * cdot_max / c_max``.
    """
    if c_max == 0:
        raise ZeroDivisionError("c_max must be nonzero")
    if voxel_len <= 0 or peak_duration <= 0 or c_max < 0 or cdot_max < 0:
        raise ValueError("velocity inputs must be positive")
    return 2.0 * voxel_len / peak_duration, voxel_len * cdot_max / c_max
