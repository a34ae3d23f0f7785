import csv
import json

import numpy as np
import pytest

from tsdecomp import SyntheticSpec, generate_synthetic, validate_series
from tsdecomp.cli import main, read_series_csv


def write_csv(path, values, labels=None, header=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for i, v in enumerate(values):
            cell = "" if v is None else f"{v:.12g}"
            if labels is not None:
                w.writerow([labels[i], cell])
            else:
                w.writerow([cell])


@pytest.fixture
def step_csv(tmp_path):
    series, _, _, _ = generate_synthetic(SyntheticSpec(
        n=100, trend_breaks=((49, 0.0, 10.0),), noise_sd=0.0))
    path = tmp_path / "step.csv"
    write_csv(path, list(series.values), header=["value"])
    return path


@pytest.fixture
def noisy_csv(tmp_path):
    series, _, _, _ = generate_synthetic(SyntheticSpec(
        n=200, trend_breaks=((99, 0.0, 8.0),), seasonal_amplitude=1.5,
        period=12, noise_sd=1.0, spike_indices=(50,), spike_magnitude=9.0,
        seed=2))
    path = tmp_path / "noisy.csv"
    write_csv(path, list(series.values), header=["value"])
    return path


class TestReadCsv:
    def test_single_column_with_header(self, tmp_path):
        p = tmp_path / "a.csv"
        write_csv(p, [1.0, 2.0, 3.0], header=["value"])
        values, labels = read_series_csv(p)
        assert values == [1.0, 2.0, 3.0]
        assert labels is None

    def test_two_columns_without_header(self, tmp_path):
        p = tmp_path / "b.csv"
        write_csv(p, [1.0, 2.0], labels=["t0", "t1"])
        values, labels = read_series_csv(p)
        assert values == [1.0, 2.0]
        assert labels == ["t0", "t1"]

    def test_missing_cells_become_none(self, tmp_path):
        p = tmp_path / "c.csv"
        write_csv(p, [1.0, None, 3.0], header=["value"])
        assert read_series_csv(p)[0] == [1.0, None, 3.0]


class TestDecomposeCommand:
    def test_minimal_run(self, step_csv, tmp_path):
        out = tmp_path / "out.csv"
        code = main(["decompose", "--input", str(step_csv),
                     "--output", str(out)])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 100
        assert set(rows[0]) == {"index", "time", "value", "cleaned", "trend",
                                "seasonal", "residual", "segment", "anomaly"}
        assert {r["segment"] for r in rows} == {"0", "1"}

    def test_component_sum_matches_cleaned(self, noisy_csv, tmp_path):
        out = tmp_path / "out.csv"
        assert main(["decompose", "--input", str(noisy_csv), "--period", "12",
                     "--output", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        for r in rows:
            total = float(r["trend"]) + float(r["seasonal"]) + float(r["residual"])
            assert abs(total - float(r["cleaned"])) < 1e-9

    def test_roundtrip_reingestion(self, noisy_csv, tmp_path):
        out = tmp_path / "out.csv"
        assert main(["decompose", "--input", str(noisy_csv),
                     "--output", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        cleaned_col = [float(r["cleaned"]) for r in rows]
        ts = validate_series(cleaned_col)
        np.testing.assert_array_equal(ts.values, np.array(cleaned_col))

    def test_json_summary_echoes_config(self, noisy_csv, tmp_path):
        out, js = tmp_path / "o.csv", tmp_path / "o.json"
        assert main(["decompose", "--input", str(noisy_csv), "--period", "12",
                     "--smoother", "ma", "--anomaly", "mad",
                     "--output", str(out), "--json", str(js)]) == 0
        summary = json.loads(js.read_text())
        cfg = summary["config"]
        assert cfg["smoother"] == "moving_average"
        assert cfg["anomaly_method"] == "mad"
        assert cfg["anomaly_threshold"] == 3.5
        assert cfg["window"] == 13
        assert cfg["period"] == 12

    def test_multiplicative_negative_exit_1(self, tmp_path, capsys):
        p = tmp_path / "neg.csv"
        vals = [1.0] * 60
        vals[7] = -1.0
        write_csv(p, vals, header=["value"])
        code = main(["decompose", "--input", str(p), "--model", "multiplicative",
                     "--changepoint", "none", "--anomaly", "none",
                     "--output", str(tmp_path / "o.csv")])
        assert code == 1
        assert "index 7" in capsys.readouterr().err

    def test_missing_file_exit_1(self, tmp_path, capsys):
        code = main(["decompose", "--input", str(tmp_path / "nope.csv"),
                     "--output", str(tmp_path / "o.csv")])
        assert code == 1
        assert capsys.readouterr().err

    def test_internal_error_exit_2(self, step_csv, tmp_path, monkeypatch, capsys):
        import tsdecomp.cli as cli_mod
        def boom(*a, **k):
            raise RuntimeError("unexpected")
        monkeypatch.setattr(cli_mod, "decompose_structural", boom)
        code = main(["decompose", "--input", str(step_csv),
                     "--output", str(tmp_path / "o.csv")])
        assert code == 2
        assert "internal error" in capsys.readouterr().err

    def test_impute_flag(self, tmp_path):
        p = tmp_path / "gap.csv"
        write_csv(p, [float(i) for i in range(50)] + [None] + [float(i) for i in range(51, 100)],
                  header=["value"])
        out = tmp_path / "o.csv"
        assert main(["decompose", "--input", str(p), "--output", str(out),
                     "--impute"]) == 0
        assert main(["decompose", "--input", str(p), "--output", str(out)]) == 1


class TestBreakpointsCommand:
    def test_constant_series(self, tmp_path, capsys):
        p = tmp_path / "c.csv"
        write_csv(p, [5.0] * 100, header=["value"])
        assert main(["breakpoints", "--input", str(p)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload == {"breaks": [], "method": "pelt", "penalty": "auto"}

    def test_step_fixture(self, step_csv, capsys):
        assert main(["breakpoints", "--input", str(step_csv)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["breaks"] == [49]

    def test_method_none_always_empty(self, step_csv, capsys):
        assert main(["breakpoints", "--input", str(step_csv),
                     "--changepoint", "none"]) == 0
        assert json.loads(capsys.readouterr().out)["breaks"] == []


class TestAnomaliesCommand:
    def test_constant_series_empty(self, tmp_path, capsys):
        p = tmp_path / "c.csv"
        write_csv(p, [5.0] * 100, header=["value"])
        assert main(["anomalies", "--input", str(p)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["indices"] == []
        assert payload["method"] == "rolling_median"

    def test_spike_fixture(self, tmp_path, capsys):
        series, _, _, _ = generate_synthetic(SyntheticSpec(
            n=100, noise_sd=1.0, spike_indices=(50,), spike_magnitude=10.0,
            seed=3))
        p = tmp_path / "s.csv"
        write_csv(p, list(series.values), header=["value"])
        assert main(["anomalies", "--input", str(p), "--anomaly", "mad"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert 50 in payload["indices"]
        assert payload["threshold"] == 3.5
        assert "50" in payload["replacements"]

    def test_method_none_empty(self, noisy_csv, capsys):
        assert main(["anomalies", "--input", str(noisy_csv),
                     "--anomaly", "none"]) == 0
        assert json.loads(capsys.readouterr().out)["indices"] == []


class TestSvgOutput:
    def test_deterministic_and_marks_breaks(self, noisy_csv, tmp_path):
        args = ["decompose", "--input", str(noisy_csv), "--period", "12",
                "--output", str(tmp_path / "o.csv")]
        svg1, svg2 = tmp_path / "p1.svg", tmp_path / "p2.svg"
        assert main(args + ["--plot", str(svg1)]) == 0
        assert main(args + ["--plot", str(svg2)]) == 0
        b1, b2 = svg1.read_bytes(), svg2.read_bytes()
        assert b1 == b2
        text = b1.decode()
        with open(tmp_path / "o.csv") as fh:
            n_segments = len({r["segment"] for r in csv.DictReader(fh)})
        assert text.count('class="changepoint"') == n_segments - 1

    def test_flat_seasonal_panel_renders(self, step_csv, tmp_path):
        svg = tmp_path / "p.svg"
        assert main(["decompose", "--input", str(step_csv),
                     "--output", str(tmp_path / "o.csv"),
                     "--plot", str(svg)]) == 0
        assert "seasonal" in svg.read_text()


class TestBenchCommand:
    def test_csv_table(self, capsys):
        assert main(["bench", "--n", "300", "--breaks", "149", "--jump", "6",
                     "--seed", "1", "--configs", "pelt,none"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].startswith("config_id,")
        assert len(out) == 3

    def test_json_table(self, capsys):
        assert main(["bench", "--n", "200", "--configs", "pelt",
                     "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 1 and rows[0]["config_id"] == "pelt"
