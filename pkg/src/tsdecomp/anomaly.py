"""Outlier flagging and replacement, applied per segment.

Each detector returns ``(flags, scores)`` arrays aligned with the input;
the pipeline assembles per-segment fragments into a full AnomalyReport.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import TimeSeries
from .errors import AllPointsFlagged, EvenWindow, InvalidConfig, SegmentTooShort

#: Gaussian consistency factors for robust scale estimates.
MAD_SCALE = 1.4826       # median absolute deviation
MEANAD_SCALE = 1.2533    # mean absolute deviation (fallback when MAD = 0)


def _as_array(values, min_len: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size < min_len:
        raise SegmentTooShort(f"{what} needs at least {min_len} points, got {arr.size}")
    return arr


def _robust_scores(deviations: np.ndarray, center_for_scale: np.ndarray) -> np.ndarray:
    """|deviation| / robust scale, with the MAD -> mean-abs-dev -> zero ladder."""
    med = np.median(center_for_scale)
    mad = float(np.median(np.abs(center_for_scale - med)))
    if mad > 0:
        return np.abs(deviations) / (MAD_SCALE * mad)
    meanad = float(np.mean(np.abs(center_for_scale - med)))
    if meanad > 0:
        return np.abs(deviations) / (MEANAD_SCALE * meanad)
    return np.zeros_like(deviations)


def detect_zscore(segment_values, threshold: float = 3.0):
    """Flag points more than ``threshold`` population standard deviations
    from the segment mean. A zero-variance segment produces no flags."""
    y = _as_array(segment_values, 3, "z-score detection")
    sd = float(np.std(y))
    if sd == 0.0:
        scores = np.zeros_like(y)
    else:
        scores = np.abs(y - y.mean()) / sd
    return scores > threshold, scores


def detect_mad(segment_values, threshold: float = 3.5):
    """Flag points by deviation from the median in robust MAD units.

    score_i = |y_i - median| / (1.4826 * MAD); when MAD degenerates to zero
    the mean absolute deviation from the median (scaled by 1.2533) is used,
    and if that is also zero nothing is flagged.
    """
    y = _as_array(segment_values, 3, "MAD detection")
    med = np.median(y)
    scores = _robust_scores(y - med, y)
    return scores > threshold, scores


def rolling_median(values, window: int) -> np.ndarray:
    """Centered rolling median; near the edges the window shrinks
    symmetrically (half-width min(h, i, n-1-i)) so no data is invented."""
    y = np.asarray(values, dtype=float)
    n = y.size
    h = window // 2
    out = np.empty(n)
    for i in range(n):
        hi = min(h, i, n - 1 - i)
        out[i] = np.median(y[i - hi : i + hi + 1])
    return out


def detect_rolling_median(segment_values, window: Optional[int] = None,
                          threshold: float = 3.0):
    """Flag points whose deviation from a centered rolling median is large
    relative to the robust scale of all such deviations."""
    if window is None:
        window = 11
    if window % 2 == 0:
        raise EvenWindow(f"window must be odd, got {window}")
    if window < 3:
        raise InvalidConfig(f"window must be >= 3, got {window}")
    y = _as_array(segment_values, window, "rolling-median detection")
    r = y - rolling_median(y, window)
    scores = _robust_scores(r, r)
    return scores > threshold, scores


def apply_policy(series, flags, policy: str = "replace"):
    """Replace flagged points (or keep them) and report the substitutions.

    Replacement is linear interpolation between the nearest unflagged
    neighbors; flagged runs touching a boundary take the nearest unflagged
    value. Returns ``(cleaned, replacements)``.
    """
    if isinstance(series, TimeSeries):
        y = np.asarray(series.values, dtype=float)
    else:
        y = np.asarray(series, dtype=float)
    flags = np.asarray(flags, dtype=bool)
    if flags.size != y.size:
        raise InvalidConfig("flags length must match series length")
    if policy == "keep" or not flags.any():
        return y.copy(), {}
    if flags.all():
        raise AllPointsFlagged("cannot replace: every point is flagged")
    cleaned = y.copy()
    good = np.flatnonzero(~flags)
    bad = np.flatnonzero(flags)
    # np.interp clamps to end values, which is exactly the boundary rule
    cleaned[bad] = np.interp(bad, good, y[good])
    replacements = {int(i): float(cleaned[i]) for i in bad}
    return cleaned, replacements


def detect(segment_values, method: str, threshold: Optional[float] = None,
           window: Optional[int] = None):
    """Dispatch on method name; 'none' flags nothing."""
    y = np.asarray(segment_values, dtype=float)
    if method == "none":
        return np.zeros(y.size, dtype=bool), np.zeros(y.size)
    if method == "zscore":
        return detect_zscore(y, 3.0 if threshold is None else threshold)
    if method == "mad":
        return detect_mad(y, 3.5 if threshold is None else threshold)
    if method == "rolling_median":
        return detect_rolling_median(y, window, 3.0 if threshold is None else threshold)
    raise InvalidConfig(f"unknown anomaly method {method!r}")
