"""Seasonal extraction and residual computation.

The seasonal component is a single-pass cyclic-subseries estimate: phase
means of the detrended series, centered to sum to zero over one period and
tiled across the full length. Multiplicative series are handled in log space
so the product identity holds exactly by construction.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import (
    InvalidConfig,
    NonPositiveValueForMultiplicative,
    PeriodMissing,
    PeriodTooLarge,
)


def extract_seasonal(detrended, period: Optional[int]) -> np.ndarray:
    """Phase means of ``detrended``, centered to zero mean and tiled to n."""
    y = np.asarray(detrended, dtype=float)
    n = y.size
    if period is None:
        raise PeriodMissing("seasonal extraction requires a period")
    if period < 2:
        raise InvalidConfig(f"period must be >= 2, got {period}")
    if period > n // 2:
        raise PeriodTooLarge(f"period {period} exceeds n//2 = {n // 2}")
    phases = np.arange(n) % period
    means = np.array([y[phases == j].mean() for j in range(period)])
    means -= means.mean()
    return means[phases]


def decompose_components(cleaned, trend, period: Optional[int], model: str,
                         log_trend_smoother: Optional[Callable] = None):
    """Split a cleaned series into (trend, seasonal, residual).

    Additive: S from the detrended series (zeros when no period), R the exact
    remainder. Multiplicative: the log series is decomposed additively with
    its own smoothed log trend (supplied via ``log_trend_smoother``, falling
    back to log of the given trend) and exponentiated, so y = T*S*R holds in
    log space exactly.
    """
    y = np.asarray(cleaned, dtype=float)
    t = np.asarray(trend, dtype=float)
    if model == "additive":
        if period is not None:
            s = extract_seasonal(y - t, period)
        else:
            s = np.zeros_like(y)
        return t, s, y - t - s
    if model != "multiplicative":
        raise InvalidConfig(f"unknown model {model!r}")

    bad = np.flatnonzero(y <= 0)
    if bad.size:
        raise NonPositiveValueForMultiplicative(int(bad[0]))
    ylog = np.log(y)
    if log_trend_smoother is not None:
        tlog = np.asarray(log_trend_smoother(ylog), dtype=float)
    else:
        if np.any(t <= 0):
            raise NonPositiveValueForMultiplicative(int(np.flatnonzero(t <= 0)[0]))
        tlog = np.log(t)
    if period is not None:
        slog = extract_seasonal(ylog - tlog, period)
    else:
        slog = np.zeros_like(y)
    rlog = ylog - tlog - slog
    return np.exp(tlog), np.exp(slog), np.exp(rlog)
