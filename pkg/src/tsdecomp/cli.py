"""Command-line front end: CSV in, CSV/JSON/SVG out.

Exit codes: 0 success, 1 input or validation error, 2 internal error.
All diagnostics go to stderr; numbers are written with 12 significant
digits and a ``.`` decimal point regardless of locale.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .bench import compare_methods, score_changepoints
from .core import PipelineConfig, segments_from, validate_series
from .errors import DecompositionError
from .pipeline import SyntheticSpec, decompose_structural, generate_synthetic
from .svgplot import render_components_svg

CHANGEPOINT_CHOICES = ("pelt", "binseg", "cusum", "none")
ANOMALY_CHOICES = {"rollmedian": "rolling_median", "zscore": "zscore",
                   "mad": "mad", "none": "none"}
SMOOTHER_CHOICES = {"lowess": "lowess", "ma": "moving_average",
                    "spline": "penalized"}

MISSING_TOKENS = {"", "na", "nan", "null", "none"}


def _num(x: float) -> str:
    return f"{x:.12g}"


def read_series_csv(path):
    """Read a 1-column (value) or 2-column (time,value) CSV.

    The header row is optional and detected by non-numeric cells. Empty or
    NA-like cells become missing values (handled by --impute downstream).
    Returns (raw_values, time_labels_or_None).
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row]
            if not cells:
                continue
            rows.append(cells)
    if not rows:
        raise DecompositionError(f"no data rows in {path}")
    ncols = len(rows[0])
    if ncols not in (1, 2):
        raise DecompositionError(f"expected 1 or 2 CSV columns, got {ncols}")

    def parse(cell):
        if cell.lower() in MISSING_TOKENS:
            return None
        try:
            return float(cell)
        except ValueError:
            raise DecompositionError(f"non-numeric value {cell!r}")

    start = 0
    value_cell = rows[0][-1]
    if value_cell.lower() not in MISSING_TOKENS:
        try:
            float(value_cell)
        except ValueError:
            start = 1  # header row
    if start >= len(rows):
        raise DecompositionError(f"no data rows in {path}")
    values = [parse(r[-1]) for r in rows[start:]]
    labels = [r[0] for r in rows[start:]] if ncols == 2 else None
    return values, labels


def _add_pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="input CSV path")
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--changepoint", choices=CHANGEPOINT_CHOICES, default="pelt")
    p.add_argument("--penalty", default="auto", help="'auto' or a positive float")
    p.add_argument("--min-seg", type=int, default=10, dest="min_seg")
    p.add_argument("--anomaly", choices=sorted(ANOMALY_CHOICES), default="rollmedian")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--policy", choices=("replace", "keep"), default="replace")
    p.add_argument("--smoother", choices=sorted(SMOOTHER_CHOICES), default="lowess")
    p.add_argument("--span", type=float, default=0.3)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--lambda", type=float, default=1600.0, dest="smooth_lambda")
    p.add_argument("--model", choices=("additive", "multiplicative"), default="additive")
    p.add_argument("--impute", action="store_true",
                   help="linearly interpolate interior missing values")


def _config_from(args) -> PipelineConfig:
    penalty = args.penalty
    if penalty != "auto":
        penalty = float(penalty)
    return PipelineConfig(
        changepoint_method=args.changepoint,
        penalty=penalty,
        min_segment_length=args.min_seg,
        anomaly_method=ANOMALY_CHOICES[args.anomaly],
        anomaly_threshold=args.threshold,
        anomaly_policy=args.policy,
        smoother=SMOOTHER_CHOICES[args.smoother],
        span=args.span,
        window=args.window,
        smooth_lambda=args.smooth_lambda,
        model=args.model,
        period=args.period,
    )


def _load_series(args):
    values, labels = read_series_csv(args.input)
    return validate_series(values, labels, impute=args.impute)


def cmd_decompose(args) -> int:
    series = _load_series(args)
    cfg = _config_from(args)
    result = decompose_structural(series, cfg)

    seg_ids = np.empty(len(series), dtype=int)
    for seg in segments_from(result.changepoints):
        seg_ids[seg.start : seg.end + 1] = seg.id
    labels = series.time_labels

    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "time", "value", "cleaned", "trend", "seasonal",
                    "residual", "segment", "anomaly"])
        for i in range(len(series)):
            w.writerow([
                i,
                labels[i] if labels is not None else i,
                _num(series.values[i]),
                _num(result.cleaned[i]),
                _num(result.trend[i]),
                _num(result.seasonal[i]),
                _num(result.residual[i]),
                int(seg_ids[i]),
                int(result.anomalies.flags[i]),
            ])

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(result.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.plot:
        render_components_svg(result, args.plot)
    return 0


def cmd_breakpoints(args) -> int:
    series = _load_series(args)
    cfg = _config_from(args)
    from . import changepoint as _cp
    breaks = _cp.detect(
        series, cfg.changepoint_method, penalty=cfg.penalty,
        min_segment_length=cfg.min_segment_length,
        critical_value=cfg.cusum_critical_value,
        max_breaks=cfg.max_breaks,
    )
    payload = {
        "breaks": list(breaks.breaks),
        "method": cfg.changepoint_method,
        "penalty": cfg.penalty,
    }
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_anomalies(args) -> int:
    series = _load_series(args)
    cfg = _config_from(args)
    result = decompose_structural(series, cfg)
    payload = {
        "indices": result.anomalies.indices,
        "scores": [float(_num(s)) for s in result.anomalies.scores],
        "method": result.anomalies.method,
        "threshold": result.anomalies.threshold_used,
        "replacements": {str(k): v for k, v in result.anomalies.replacements.items()},
    }
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_bench(args) -> int:
    spec = SyntheticSpec(
        n=args.n,
        trend_breaks=tuple((b, 0.0, args.jump) for b in args.breaks),
        seasonal_amplitude=args.amplitude,
        period=args.period or 12,
        noise_sd=args.noise,
        spike_indices=tuple(args.spikes),
        spike_magnitude=args.spike_magnitude,
        seed=args.seed,
    )
    series, components, true_breaks, true_anoms = generate_synthetic(spec)
    truth = {
        "trend": components["trend"],
        "seasonal": components["seasonal"],
        "breaks": list(true_breaks),
        "anomalies": list(true_anoms),
    }
    configs = []
    ids = []
    for method in args.configs.split(","):
        method = method.strip()
        if method not in CHANGEPOINT_CHOICES:
            raise DecompositionError(f"unknown changepoint method {method!r}")
        configs.append(PipelineConfig(changepoint_method=method,
                                      period=spec.period if args.amplitude else None))
        ids.append(method)
    rows = compare_methods(series, truth, configs, tolerance=args.tolerance,
                           config_ids=ids)
    fields = ["config_id", "trend_rmse", "seasonal_rmse", "changepoint_f1",
              "anomaly_precision", "anomaly_recall", "runtime_ms", "error"]
    if args.format == "json":
        json.dump([r.as_dict() for r in rows], sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    else:
        w = csv.writer(sys.stdout)
        w.writerow(fields)
        for r in rows:
            d = r.as_dict()
            w.writerow([d["config_id"]] +
                       [_num(d[f]) for f in fields[1:-1]] +
                       [d["error"] or ""])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsdecomp",
        description="Modular time-series decomposition: changepoints, "
                    "anomalies, trend smoothing, seasonal extraction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="run the full pipeline")
    _add_pipeline_flags(p)
    p.add_argument("--output", required=True, help="component CSV path")
    p.add_argument("--json", default=None, help="JSON summary path")
    p.add_argument("--plot", default=None, help="SVG plot path")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("breakpoints", help="changepoint detection only")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_breakpoints)

    p = sub.add_parser("anomalies", help="changepoints + anomaly detection")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_anomalies)

    p = sub.add_parser("bench", help="score configurations on synthetic data")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--breaks", type=int, nargs="*", default=[])
    p.add_argument("--jump", type=float, default=5.0)
    p.add_argument("--amplitude", type=float, default=0.0)
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--spikes", type=int, nargs="*", default=[])
    p.add_argument("--spike-magnitude", type=float, default=8.0, dest="spike_magnitude")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=int, default=5)
    p.add_argument("--configs", default="pelt,binseg,cusum,none")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DecompositionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
