"""Trend estimation: LOESS, centered moving average, and a penalized
second-difference (Whittaker) smoother, applied per segment.

No smoothing window ever crosses a changepoint: ``smooth_segmented`` runs the
chosen smoother independently inside each segment and concatenates.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.linalg import solveh_banded

from .core import ChangepointSet, TimeSeries, segments_from
from .errors import EvenWindow, InvalidConfig, SegmentTooShort, WindowTooLarge


def _as_array(values, min_len: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size < min_len:
        raise SegmentTooShort(f"{what} needs at least {min_len} points, got {arr.size}")
    return arr


def _lowess_windows(m: int, q: int):
    """Start index of each point's q-nearest neighborhood.

    Neighborhoods are contiguous: the q nearest indices by |j - i|, with
    distance ties taking the lower index first, always form a window. At the
    boundaries the window shifts inward so its size stays exactly q.
    """
    left = (q - 1 + 1) // 2  # ceil((q-1)/2): lower index wins distance ties
    lo = np.arange(m) - left
    np.clip(lo, 0, m - q, out=lo)
    return lo


def smooth_lowess(segment_values, span: float = 0.3,
                  robustness_iterations: int = 2) -> np.ndarray:
    """Locally weighted degree-1 regression with tricube weights.

    For each point the q = max(ceil(span*m), 3) nearest neighbors are fit by
    weighted least squares; w = (1 - (d/d_max)^3)^3 with d_max the farthest
    neighbor distance (uniform weights when d_max = 0). Robustness passes
    multiply bisquare weights delta = (1 - (e / (6 median|e|))^2)^2 into the
    fit and refit; iteration stops early when median|e| = 0.

    Exactly reproduces affine inputs (a degree-1 fit is unbiased for lines).
    """
    y = _as_array(segment_values, 4, "lowess")
    if not (0.0 < span <= 1.0):
        raise InvalidConfig("span must lie in (0, 1]")
    m = y.size
    q = min(max(math.ceil(span * m), 3), m)
    lo = _lowess_windows(m, q)
    idx = lo[:, None] + np.arange(q)[None, :]          # (m, q) neighbor indices
    x = idx.astype(float)
    yy = y[idx]
    centers = np.arange(m, dtype=float)[:, None]
    dist = np.abs(x - centers)
    dmax = dist.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(dmax > 0, (1.0 - (dist / dmax) ** 3) ** 3, 1.0)

    delta = np.ones(m)
    fitted = np.empty(m)
    for iteration in range(robustness_iterations + 1):
        wt = w * delta[idx]
        xc = x - centers                                # centered for conditioning
        sw = wt.sum(axis=1)
        sx = (wt * xc).sum(axis=1)
        sy = (wt * yy).sum(axis=1)
        sxx = (wt * xc * xc).sum(axis=1)
        sxy = (wt * xc * yy).sum(axis=1)
        denom = sw * sxx - sx * sx
        ok = denom > 1e-12 * np.maximum(sw * sxx, 1e-300)
        # fitted value at the centered origin is the local intercept
        with np.errstate(invalid="ignore", divide="ignore"):
            intercept = (sxx * sy - sx * sxy) / denom
            mean = sy / np.maximum(sw, 1e-300)
        fitted = np.where(ok, intercept, mean)
        if iteration == robustness_iterations:
            break
        e = y - fitted
        s = float(np.median(np.abs(e)))
        if s == 0.0:
            break
        delta = np.clip(1.0 - (e / (6.0 * s)) ** 2, 0.0, 1.0) ** 2
    return fitted


def smooth_moving_average(segment_values, window: int = 11) -> np.ndarray:
    """Centered moving average; the window shrinks symmetrically near the
    edges (down to size 1 at the endpoints) so linear trends are preserved
    at interior points and no data is fabricated."""
    y = np.asarray(segment_values, dtype=float)
    m = y.size
    if window % 2 == 0:
        raise EvenWindow(f"window must be odd, got {window}")
    if window < 3:
        raise InvalidConfig(f"window must be >= 3, got {window}")
    if window > m:
        raise WindowTooLarge(f"window {window} exceeds segment length {m}")
    h = window // 2
    c = np.concatenate(([0.0], np.cumsum(y)))
    i = np.arange(m)
    hi = np.minimum(np.minimum(h, i), m - 1 - i)
    return (c[i + hi + 1] - c[i - hi]) / (2 * hi + 1)


def smooth_penalized(segment_values, lam: float = 1600.0) -> np.ndarray:
    """Whittaker second-difference smoother.

    Minimizes sum (y - z)^2 + lam * sum (z'' )^2 by solving the banded SPD
    system (I + lam * D2'D2) z = y directly. lam = 0 is the identity; affine
    inputs are reproduced exactly (second differences vanish).
    """
    y = _as_array(segment_values, 4, "penalized smoothing")
    if lam < 0:
        raise InvalidConfig("lambda must be >= 0")
    if lam == 0.0:
        return y.copy()
    m = y.size
    d2 = sparse.diags([1.0, -2.0, 1.0], offsets=[0, 1, 2], shape=(m - 2, m))
    p = (d2.T @ d2).tocsr()
    ab = np.zeros((3, m))
    ab[2] = 1.0 + lam * p.diagonal(0)
    ab[1, 1:] = lam * p.diagonal(1)
    ab[0, 2:] = lam * p.diagonal(2)
    return solveh_banded(ab, y, lower=False)


#: Minimum segment length below which each smoother falls back to the mean.
def _min_length(method: str, window: int) -> int:
    if method == "moving_average":
        return max(window, 3)
    return 4


def smooth_segment(values, method: str, *, span: float = 0.3,
                   robustness_iterations: int = 2, window: int = 11,
                   lam: float = 1600.0) -> np.ndarray:
    if method == "lowess":
        return smooth_lowess(values, span, robustness_iterations)
    if method == "moving_average":
        return smooth_moving_average(values, window)
    if method == "penalized":
        return smooth_penalized(values, lam)
    raise InvalidConfig(f"unknown smoother {method!r}")


def smooth_segmented(series, changepoints: Optional[ChangepointSet], method: str,
                     *, span: float = 0.3, robustness_iterations: int = 2,
                     window: int = 11, lam: float = 1600.0) -> np.ndarray:
    """Apply the chosen smoother independently to each segment.

    Segments shorter than the method's minimum take their own mean as trend,
    so detector-produced short segments never abort the pipeline.
    """
    if isinstance(series, TimeSeries):
        y = np.asarray(series.values, dtype=float)
    else:
        y = np.asarray(series, dtype=float)
    if changepoints is None:
        changepoints = ChangepointSet(breaks=(), n=y.size)
    out = np.empty(y.size)
    for seg in segments_from(changepoints):
        part = y[seg.start : seg.end + 1]
        if part.size < _min_length(method, window):
            out[seg.start : seg.end + 1] = part.mean()
        else:
            out[seg.start : seg.end + 1] = smooth_segment(
                part, method, span=span,
                robustness_iterations=robustness_iterations,
                window=window, lam=lam,
            )
    return out
