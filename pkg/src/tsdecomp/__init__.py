"""Modular time-series decomposition.

Four independent, user-selectable stages: changepoint detection, anomaly
detection, per-segment trend smoothing, and seasonal/residual extraction,
plus a benchmarking harness and a CSV/SVG command-line tool.
"""

from .anomaly import apply_policy, detect_mad, detect_rolling_median, detect_zscore
from .bench import MethodScore, compare_methods, score_changepoints
from .changepoint import (
    CostModel,
    PenaltyPolicy,
    detect_binseg,
    detect_cusum,
    detect_pelt,
    exhaustive_optimal_partition,
)
from .core import (
    AnomalyReport,
    ChangepointSet,
    DecompositionResult,
    PipelineConfig,
    Segment,
    TimeSeries,
    segments_from,
    validate_series,
)
from .pipeline import SyntheticSpec, decompose_structural, generate_synthetic
from .seasonal import decompose_components, extract_seasonal
from .smoothing import (
    smooth_lowess,
    smooth_moving_average,
    smooth_penalized,
    smooth_segmented,
)
from .svgplot import render_components_svg

__version__ = "0.1.0"

__all__ = [
    "AnomalyReport",
    "ChangepointSet",
    "CostModel",
    "DecompositionResult",
    "MethodScore",
    "PenaltyPolicy",
    "PipelineConfig",
    "Segment",
    "SyntheticSpec",
    "TimeSeries",
    "apply_policy",
    "compare_methods",
    "decompose_components",
    "decompose_structural",
    "detect_binseg",
    "detect_cusum",
    "detect_mad",
    "detect_pelt",
    "detect_rolling_median",
    "detect_zscore",
    "exhaustive_optimal_partition",
    "extract_seasonal",
    "generate_synthetic",
    "render_components_svg",
    "score_changepoints",
    "segments_from",
    "smooth_lowess",
    "smooth_moving_average",
    "smooth_penalized",
    "smooth_segmented",
    "validate_series",
]
