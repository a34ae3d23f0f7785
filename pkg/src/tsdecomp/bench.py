"""Benchmark harness: score pipeline configurations against ground truth."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ChangepointSet, PipelineConfig
from .errors import DecompositionError
from .pipeline import decompose_structural

DEFAULT_TOLERANCE = 5


@dataclass(frozen=True)
class MethodScore:
    """One row of the comparison table; ``error`` is set when the run failed."""

    config_id: str
    trend_rmse: float
    seasonal_rmse: float
    changepoint_f1: float
    anomaly_precision: float
    anomaly_recall: float
    runtime_ms: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self) -> dict:
        return {
            "config_id": self.config_id,
            "trend_rmse": self.trend_rmse,
            "seasonal_rmse": self.seasonal_rmse,
            "changepoint_f1": self.changepoint_f1,
            "anomaly_precision": self.anomaly_precision,
            "anomaly_recall": self.anomaly_recall,
            "runtime_ms": self.runtime_ms,
            "error": self.error,
        }


def _greedy_match(predicted, truth, tolerance: int) -> int:
    """One-to-one matches: each predicted break (ascending) takes the nearest
    unmatched true break within the tolerance window; distance ties go to the
    smaller true index."""
    truth = sorted(truth)
    used = [False] * len(truth)
    matches = 0
    for p in sorted(predicted):
        best_j = -1
        best_d = tolerance + 1
        for j, t in enumerate(truth):
            if used[j]:
                continue
            d = abs(p - t)
            if d < best_d:
                best_d = d
                best_j = j
        if best_j >= 0 and best_d <= tolerance:
            used[best_j] = True
            matches += 1
    return matches


def score_changepoints(predicted, truth, tolerance: int = DEFAULT_TOLERANCE):
    """Precision, recall, and F1 of predicted breaks under +-tolerance matching.

    Empty predicted and empty truth count as perfect; an empty side against a
    nonempty one scores zero on the corresponding metric.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if isinstance(predicted, ChangepointSet):
        predicted = predicted.breaks
    predicted = list(predicted)
    truth = list(truth)
    matches = _greedy_match(predicted, truth, tolerance)
    precision = matches / len(predicted) if predicted else (1.0 if not truth else 0.0)
    recall = matches / len(truth) if truth else (1.0 if not predicted else 0.0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def _point_metrics(predicted_indices, true_indices):
    pred = set(int(i) for i in predicted_indices)
    true = set(int(i) for i in true_indices)
    tp = len(pred & true)
    precision = tp / len(pred) if pred else (1.0 if not true else 0.0)
    recall = tp / len(true) if true else (1.0 if not pred else 0.0)
    return precision, recall


def _rmse(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def compare_methods(series, truth: dict, configs, tolerance: int = DEFAULT_TOLERANCE,
                    config_ids: Optional[Sequence[str]] = None) -> list[MethodScore]:
    """Run each configuration on ``series`` and score it against ``truth``.

    ``truth`` carries 'trend' and 'seasonal' arrays plus 'breaks' and
    'anomalies' index lists (missing keys score vacuously). A failing config
    produces a row with ``error`` set and NaN metrics; it never aborts the
    batch. Output order matches input order.
    """
    if not configs:
        raise ValueError("need at least one config")
    if config_ids is None:
        config_ids = [
            f"{i}:{c.changepoint_method}+{c.anomaly_method}+{c.smoother}"
            for i, c in enumerate(configs)
        ]
    rows = []
    for cid, cfg in zip(config_ids, configs):
        t0 = time.perf_counter()
        try:
            result = decompose_structural(series, cfg)
        except DecompositionError as exc:
            rows.append(MethodScore(
                config_id=cid, trend_rmse=math.nan, seasonal_rmse=math.nan,
                changepoint_f1=math.nan, anomaly_precision=math.nan,
                anomaly_recall=math.nan,
                runtime_ms=(time.perf_counter() - t0) * 1000.0,
                error=str(exc),
            ))
            continue
        runtime_ms = (time.perf_counter() - t0) * 1000.0
        trend_rmse = _rmse(result.trend, truth["trend"]) if "trend" in truth else math.nan
        seasonal_rmse = (
            _rmse(result.seasonal, truth["seasonal"]) if "seasonal" in truth else math.nan
        )
        _, _, f1 = score_changepoints(
            result.changepoints, truth.get("breaks", []), tolerance)
        precision, recall = _point_metrics(
            result.anomalies.indices, truth.get("anomalies", []))
        rows.append(MethodScore(
            config_id=cid, trend_rmse=trend_rmse, seasonal_rmse=seasonal_rmse,
            changepoint_f1=f1, anomaly_precision=precision,
            anomaly_recall=recall, runtime_ms=runtime_ms,
        ))
    return rows
