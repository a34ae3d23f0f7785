"""Shared data types, validation, and segment bookkeeping.

All types are immutable after construction; every operation in the package is
a pure function of its inputs. Indexing is 0-based throughout, and a break
index always names the last sample of the segment to its left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptySeries,
    InvalidConfig,
    LabelLengthMismatch,
    LeadingOrTrailingMissing,
    NonFiniteValue,
)

CHANGEPOINT_METHODS = ("pelt", "binseg", "cusum", "none")
ANOMALY_METHODS = ("rolling_median", "zscore", "mad", "none")
SMOOTHERS = ("lowess", "moving_average", "penalized")
MODELS = ("additive", "multiplicative")
POLICIES = ("replace", "keep")

#: Per-method default anomaly thresholds.
DEFAULT_THRESHOLDS = {"rolling_median": 3.0, "zscore": 3.0, "mad": 3.5, "none": 0.0}


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def default_window(period: Optional[int]) -> int:
    """Default odd smoothing/detection window: 2*floor(period/2)+1, else 11."""
    if period is None:
        return 11
    return 2 * (period // 2) + 1


@dataclass(frozen=True)
class TimeSeries:
    """An observed signal with optional axis labels and seasonal period.

    ``time_labels`` are carried through to outputs but never interpreted;
    all computation is index-based.
    """

    values: np.ndarray
    time_labels: Optional[tuple] = None
    period: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        n = len(self.values)
        if n < 1:
            raise EmptySeries("series must contain at least one value")
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise NonFiniteValue(int(bad[0]))
        if self.time_labels is not None:
            object.__setattr__(self, "time_labels", tuple(self.time_labels))
            if len(self.time_labels) != n:
                raise LabelLengthMismatch(
                    f"{len(self.time_labels)} labels for {n} values"
                )
        if self.period is not None:
            if self.period < 2 or self.period > n // 2:
                raise InvalidConfig(
                    f"period must satisfy 2 <= period <= n//2, got {self.period} (n={n})"
                )

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Segment:
    """Closed index range [start, end] with a 0-based ordinal id."""

    start: int
    end: int
    id: int = 0

    def __post_init__(self):
        if self.start > self.end:
            raise InvalidConfig(f"segment start {self.start} > end {self.end}")

    def __len__(self):
        return self.end - self.start + 1


@dataclass(frozen=True)
class ChangepointSet:
    """Strictly increasing break indices partitioning a series of length n.

    A break index is the last sample of the left segment; the empty set
    means a single segment [0, n-1].
    """

    breaks: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(int(b) for b in self.breaks))
        if self.n < 1:
            raise InvalidConfig("n must be >= 1")
        prev = -1
        for b in self.breaks:
            if not (0 <= b < self.n - 1):
                raise InvalidConfig(f"break {b} out of range for n={self.n}")
            if b <= prev:
                raise InvalidConfig("breaks must be strictly increasing")
            prev = b

    @property
    def n_segments(self):
        return len(self.breaks) + 1


def segments_from(changepoints: ChangepointSet) -> list[Segment]:
    """Materialize the k+1 segments induced by k breaks; tiles [0, n-1]."""
    bounds = [-1, *changepoints.breaks, changepoints.n - 1]
    return [
        Segment(start=bounds[i] + 1, end=bounds[i + 1], id=i)
        for i in range(len(bounds) - 1)
    ]


@dataclass(frozen=True)
class AnomalyReport:
    """Flags, scores, and replacement bookkeeping for one detection pass."""

    flags: np.ndarray
    scores: np.ndarray
    method: str
    replacements: dict
    threshold_used: float

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "scores", _readonly(self.scores))
        object.__setattr__(self, "replacements", dict(self.replacements))

    @property
    def indices(self):
        return [int(i) for i in np.flatnonzero(self.flags)]


@dataclass(frozen=True)
class PipelineConfig:
    """Per-stage method selection; the single source of truth echoed into outputs.

    ``penalty`` is either the string ``"auto"`` or a fixed positive float.
    ``anomaly_threshold`` and ``window`` default per method/period when None.
    """

    changepoint_method: str = "pelt"
    penalty: object = "auto"
    min_segment_length: int = 10
    anomaly_method: str = "rolling_median"
    anomaly_threshold: Optional[float] = None
    anomaly_policy: str = "replace"
    smoother: str = "lowess"
    span: float = 0.3
    robustness_iterations: int = 2
    window: Optional[int] = None
    smooth_lambda: float = 1600.0
    model: str = "additive"
    period: Optional[int] = None
    max_anomaly_fraction: float = 0.2
    cusum_critical_value: float = 1.358
    max_breaks: Optional[int] = None

    def __post_init__(self):
        if self.changepoint_method not in CHANGEPOINT_METHODS:
            raise InvalidConfig(f"unknown changepoint method {self.changepoint_method!r}")
        if self.anomaly_method not in ANOMALY_METHODS:
            raise InvalidConfig(f"unknown anomaly method {self.anomaly_method!r}")
        if self.smoother not in SMOOTHERS:
            raise InvalidConfig(f"unknown smoother {self.smoother!r}")
        if self.model not in MODELS:
            raise InvalidConfig(f"unknown model {self.model!r}")
        if self.anomaly_policy not in POLICIES:
            raise InvalidConfig(f"unknown anomaly policy {self.anomaly_policy!r}")
        if self.penalty != "auto":
            if not (isinstance(self.penalty, (int, float)) and self.penalty > 0):
                raise InvalidConfig("penalty must be 'auto' or a positive number")
        if self.min_segment_length < 1:
            raise InvalidConfig("min_segment_length must be a positive integer")
        if not (0.0 < self.span <= 1.0):
            raise InvalidConfig("span must lie in (0, 1]")
        if self.robustness_iterations < 0:
            raise InvalidConfig("robustness_iterations must be >= 0")
        if self.window is not None and (self.window < 3 or self.window % 2 == 0):
            raise InvalidConfig("window must be an odd integer >= 3")
        if self.smooth_lambda < 0:
            raise InvalidConfig("lambda must be >= 0")
        if (self.anomaly_threshold is not None and self.anomaly_threshold <= 0
                and self.anomaly_method != "none"):
            raise InvalidConfig("anomaly_threshold must be positive")
        if self.period is not None and self.period < 2:
            raise InvalidConfig("period must be >= 2")
        if not (0.0 < self.max_anomaly_fraction <= 1.0):
            raise InvalidConfig("max_anomaly_fraction must lie in (0, 1]")
        if self.cusum_critical_value <= 0:
            raise InvalidConfig("cusum_critical_value must be positive")
        if self.max_breaks is not None and self.max_breaks < 1:
            raise InvalidConfig("max_breaks must be a positive integer")

    def resolved_threshold(self) -> float:
        if self.anomaly_threshold is not None:
            return self.anomaly_threshold
        return DEFAULT_THRESHOLDS[self.anomaly_method]

    def resolved_window(self) -> int:
        if self.window is not None:
            return self.window
        return default_window(self.period)

    def resolved(self) -> "PipelineConfig":
        """Materialize every defaulted field (for config echoes)."""
        return replace(
            self,
            anomaly_threshold=self.resolved_threshold(),
            window=self.resolved_window(),
        )

    def as_dict(self) -> dict:
        cfg = self.resolved()
        return {
            "changepoint_method": cfg.changepoint_method,
            "penalty": cfg.penalty,
            "min_segment_length": cfg.min_segment_length,
            "anomaly_method": cfg.anomaly_method,
            "anomaly_threshold": cfg.anomaly_threshold,
            "anomaly_policy": cfg.anomaly_policy,
            "smoother": cfg.smoother,
            "span": cfg.span,
            "robustness_iterations": cfg.robustness_iterations,
            "window": cfg.window,
            "lambda": cfg.smooth_lambda,
            "model": cfg.model,
            "period": cfg.period,
            "max_anomaly_fraction": cfg.max_anomaly_fraction,
            "cusum_critical_value": cfg.cusum_critical_value,
            "max_breaks": cfg.max_breaks,
        }


@dataclass(frozen=True)
class DecompositionResult:
    """Aligned trend/seasonal/residual components plus stage provenance."""

    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    model: str
    changepoints: ChangepointSet
    anomalies: AnomalyReport
    config_echo: PipelineConfig
    series: TimeSeries
    cleaned: np.ndarray
    timings_ms: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("trend", "seasonal", "residual", "cleaned"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    def summary(self) -> dict:
        """Counts, per-component variance shares, and stage timings."""
        comps = {"trend": self.trend, "seasonal": self.seasonal, "residual": self.residual}
        total = sum(float(np.var(c)) for c in comps.values())
        shares = {
            k: (float(np.var(v)) / total if total > 0 else 0.0)
            for k, v in comps.items()
        }
        return {
            "n": len(self.series),
            "model": self.model,
            "n_changepoints": len(self.changepoints.breaks),
            "changepoints": list(self.changepoints.breaks),
            "n_anomalies": int(np.count_nonzero(self.anomalies.flags)),
            "anomaly_indices": self.anomalies.indices,
            "variance_shares": shares,
            "timings_ms": dict(self.timings_ms),
            "config": self.config_echo.as_dict(),
        }


def validate_series(
    raw_values: Sequence,
    time_labels: Optional[Sequence] = None,
    period: Optional[int] = None,
    impute: bool = False,
) -> TimeSeries:
    """Validate raw input into a TimeSeries.

    Missing entries (None or NaN) are rejected unless ``impute`` is set, in
    which case interior missing runs are linearly interpolated from the
    nearest finite neighbors; missing values at either boundary are always
    rejected. Infinities are rejected unconditionally.
    """
    vals = [None if v is None else float(v) for v in raw_values]
    n = len(vals)
    if n == 0:
        raise EmptySeries("series must contain at least one value")
    missing = np.array([v is None or math.isnan(v) for v in vals], dtype=bool)
    for i, v in enumerate(vals):
        if v is not None and math.isinf(v):
            raise NonFiniteValue(i)
    arr = np.array([0.0 if m else v for v, m in zip(vals, missing)], dtype=float)
    if missing.any():
        if not impute:
            raise NonFiniteValue(int(np.flatnonzero(missing)[0]), "missing value without imputation")
        if missing[0]:
            raise LeadingOrTrailingMissing(0)
        if missing[-1]:
            raise LeadingOrTrailingMissing(n - 1)
        good = np.flatnonzero(~missing)
        arr[missing] = np.interp(np.flatnonzero(missing), good, arr[good])
    return TimeSeries(values=arr, time_labels=time_labels, period=period)
