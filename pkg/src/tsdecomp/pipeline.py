"""Four-stage decomposition orchestrator and the synthetic test-data generator.

Stage order is fixed: changepoints are detected on the raw series, anomalies
are flagged per segment on raw values and optionally replaced, the cleaned
series is smoothed per segment, and the seasonal/residual split comes last.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import anomaly as _anomaly
from . import changepoint as _changepoint
from . import seasonal as _seasonal
from . import smoothing as _smoothing
from .core import (
    AnomalyReport,
    ChangepointSet,
    DecompositionResult,
    PipelineConfig,
    TimeSeries,
    segments_from,
)
from .errors import (
    DecompositionError,
    InvalidSpec,
    PeriodTooLarge,
    StageError,
    TooManyAnomalies,
)


def _coerce_series(series) -> TimeSeries:
    if isinstance(series, TimeSeries):
        return series
    return TimeSeries(values=np.asarray(series, dtype=float))


def _detect_anomalies(y: np.ndarray, changepoints: ChangepointSet,
                      cfg: PipelineConfig):
    """Run the configured detector per segment and assemble full-length
    flags/scores. Windows shrink (to the largest odd size that fits) on
    segments shorter than the configured rolling-median window; segments
    shorter than 3 points are never flagged."""
    n = y.size
    flags = np.zeros(n, dtype=bool)
    scores = np.zeros(n)
    if cfg.anomaly_method == "none":
        return flags, scores
    threshold = cfg.resolved_threshold()
    window = cfg.resolved_window()
    for seg in segments_from(changepoints):
        part = y[seg.start : seg.end + 1]
        m = part.size
        if m < 3:
            continue
        w = window
        if cfg.anomaly_method == "rolling_median" and w > m:
            w = m if m % 2 == 1 else m - 1
            if w < 3:
                continue
        try:
            f, s = _anomaly.detect(part, cfg.anomaly_method, threshold, w)
        except DecompositionError as exc:
            raise StageError("anomaly", exc, segment_id=seg.id) from exc
        flags[seg.start : seg.end + 1] = f
        scores[seg.start : seg.end + 1] = s
    return flags, scores


def decompose_structural(series, config: Optional[PipelineConfig] = None,
                         stage_observer: Optional[Callable] = None) -> DecompositionResult:
    """Run the full pipeline and return a DecompositionResult.

    ``stage_observer``, when given, is called as ``observer(stage, values)``
    with the exact array each stage consumes (raw, raw, cleaned, detrended),
    which lets callers verify the stage-order contract.
    """
    ts = _coerce_series(series)
    cfg = config if config is not None else PipelineConfig()
    if cfg.period is None and ts.period is not None:
        cfg = replace(cfg, period=ts.period)
    y = np.asarray(ts.values, dtype=float)
    n = y.size
    if cfg.period is not None and cfg.period > n // 2:
        raise StageError("seasonal", PeriodTooLarge(
            f"period {cfg.period} exceeds n//2 = {n // 2}"))
    timings = {}

    def observe(stage, values):
        if stage_observer is not None:
            stage_observer(stage, values)

    # stage 1: changepoints on the raw series
    t0 = time.perf_counter()
    observe("changepoint", y)
    try:
        breaks = _changepoint.detect(
            ts, cfg.changepoint_method, penalty=cfg.penalty,
            min_segment_length=cfg.min_segment_length,
            critical_value=cfg.cusum_critical_value,
            max_breaks=cfg.max_breaks,
        )
    except DecompositionError as exc:
        raise StageError("changepoint", exc) from exc
    timings["changepoint"] = (time.perf_counter() - t0) * 1000.0

    # stage 2: per-segment anomaly detection on raw values, then the policy
    t0 = time.perf_counter()
    observe("anomaly", y)
    flags, scores = _detect_anomalies(y, breaks, cfg)
    cap = math.ceil(cfg.max_anomaly_fraction * n)
    count = int(np.count_nonzero(flags))
    if count > cap:
        exc = TooManyAnomalies(
            f"{count} points flagged, exceeding the cap of {cap} "
            f"(max_anomaly_fraction={cfg.max_anomaly_fraction})"
        )
        raise StageError("anomaly", exc) from exc
    try:
        cleaned, replacements = _anomaly.apply_policy(y, flags, cfg.anomaly_policy)
    except DecompositionError as exc:
        raise StageError("anomaly", exc) from exc
    report = AnomalyReport(
        flags=flags, scores=scores, method=cfg.anomaly_method,
        replacements=replacements,
        threshold_used=cfg.resolved_threshold(),
    )
    timings["anomaly"] = (time.perf_counter() - t0) * 1000.0

    # stage 3: per-segment smoothing of the cleaned series
    t0 = time.perf_counter()
    observe("smoothing", cleaned)

    def run_smoother(values):
        return _smoothing.smooth_segmented(
            values, breaks, cfg.smoother, span=cfg.span,
            robustness_iterations=cfg.robustness_iterations,
            window=cfg.resolved_window(), lam=cfg.smooth_lambda,
        )

    try:
        if cfg.model == "multiplicative":
            trend = None  # recomputed in log space below
        else:
            trend = run_smoother(cleaned)
    except DecompositionError as exc:
        raise StageError("smoothing", exc) from exc
    timings["smoothing"] = (time.perf_counter() - t0) * 1000.0

    # stage 4: seasonal extraction and residual
    t0 = time.perf_counter()
    try:
        if cfg.model == "multiplicative":
            trend, seasonal_c, residual = _seasonal.decompose_components(
                cleaned, cleaned, cfg.period, "multiplicative",
                log_trend_smoother=run_smoother,
            )
            observe("seasonal", np.log(cleaned) - np.log(trend))
        else:
            observe("seasonal", cleaned - trend)
            trend, seasonal_c, residual = _seasonal.decompose_components(
                cleaned, trend, cfg.period, "additive",
            )
    except DecompositionError as exc:
        raise StageError("seasonal", exc) from exc
    timings["seasonal"] = (time.perf_counter() - t0) * 1000.0

    return DecompositionResult(
        trend=trend, seasonal=seasonal_c, residual=residual, model=cfg.model,
        changepoints=breaks, anomalies=report, config_echo=cfg.resolved(),
        series=ts, cleaned=cleaned, timings_ms=timings,
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a reproducible synthetic series with known components.

    The series is piecewise-linear trend + amplitude*sin(2*pi*t/period) +
    Gaussian noise, with additive spikes at the listed indices. Each break is
    (index, new_slope, level_jump): the new slope and jump take effect at
    index + 1, so the break index itself is the last sample of the old regime.
    """

    n: int
    trend_breaks: tuple = ()
    base_level: float = 0.0
    base_slope: float = 0.0
    seasonal_amplitude: float = 0.0
    period: int = 12
    noise_sd: float = 0.0
    spike_indices: tuple = ()
    spike_magnitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec("n must be >= 1")
        if self.noise_sd < 0:
            raise InvalidSpec("noise_sd must be >= 0")
        if self.period < 2:
            raise InvalidSpec("period must be >= 2")
        prev = -1
        for b, _, _ in self.trend_breaks:
            if not (0 <= b < self.n - 1):
                raise InvalidSpec(f"break index {b} out of range")
            if b <= prev:
                raise InvalidSpec("break indices must be strictly increasing")
            prev = b
        for i in self.spike_indices:
            if not (0 <= i < self.n):
                raise InvalidSpec(f"spike index {i} out of range")


def _seeded_gaussians(seed: int, size: int) -> np.ndarray:
    """Box-Muller transform of the PCG64 uniform stream.

    The generator and transform are pinned here so synthetic series are
    bit-reproducible across platforms: u1, u2 are consecutive uniform blocks,
    z = sqrt(-2 ln(1-u1)) * (cos, sin)(2 pi u2) interleaved by halves.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    k = (size + 1) // 2
    u1 = 1.0 - rng.random(k)  # in (0, 1]: keeps the log finite
    u2 = rng.random(k)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:size]


def generate_synthetic(spec: SyntheticSpec):
    """Build the series described by ``spec``.

    Returns ``(series, components, true_breaks, true_anomalies)`` where
    ``components`` maps 'trend', 'seasonal', 'noise' to ground-truth arrays.
    """
    n = spec.n
    slopes = np.full(n, spec.base_slope)
    jumps = np.zeros(n)
    for b, new_slope, level_jump in spec.trend_breaks:
        slopes[b + 1 :] = new_slope
        jumps[b + 1] += level_jump
    inc = slopes + jumps
    inc[0] = 0.0
    trend = spec.base_level + np.cumsum(inc)

    t = np.arange(n)
    seasonal = spec.seasonal_amplitude * np.sin(2.0 * np.pi * t / spec.period)
    noise = spec.noise_sd * _seeded_gaussians(spec.seed, n) if spec.noise_sd > 0 else np.zeros(n)

    values = trend + seasonal + noise
    for i in spec.spike_indices:
        values[i] += spec.spike_magnitude

    period = None
    if spec.seasonal_amplitude != 0 and 2 <= spec.period <= n // 2:
        period = spec.period
    series = TimeSeries(values=values, period=period)
    components = {"trend": trend, "seasonal": seasonal, "noise": noise}
    true_breaks = tuple(b for b, _, _ in spec.trend_breaks)
    return series, components, true_breaks, tuple(spec.spike_indices)
