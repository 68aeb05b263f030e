"""Tests for modtrace.data.report."""

import json
import math

import numpy as np
import pytest


def _rows():
    from modtrace.data.report import ReportRow
    return [
        ReportRow.compare("haagerup_trace", 0.1591549, 1 / (2 * np.pi), 1e-5, {"mu": 0.0}),
        ReportRow.bound("three_lines", 0.4, 0.5, 1e-10),
        ReportRow.expectation("kms", 3e-12, 1e-10, {"t": 0.5 + 1j}),
        ReportRow.error("trace_formula", "PoleOnBoundary: pole at 0"),
        ReportRow.skipped("majorization", "no states"),
    ]


class TestPassRule:
    def test_relative_error_against_rhs(self):
        from modtrace.data.report import ReportRow
        row = ReportRow.compare("x", 1.001, 1.0, 1e-2)
        assert row.rel_err == pytest.approx(1e-3)
        assert row.passed
        assert not ReportRow.compare("x", 1.1, 1.0, 1e-2).passed

    def test_absolute_error_when_rhs_is_zero(self):
        from modtrace.data.report import ReportRow
        assert ReportRow.expectation("x", 5e-11, 1e-10).passed
        assert not ReportRow.expectation("x", 5e-10, 1e-10).passed

    def test_bound_counts_only_the_excess(self):
        from modtrace.data.report import ReportRow
        assert ReportRow.bound("b", 0.9, 1.0, 1e-10).abs_err == 0.0
        over = ReportRow.bound("b", 1.1, 1.0, 1e-2)
        assert over.rel_err == pytest.approx(0.1)
        assert not over.passed

    def test_nan_never_passes(self):
        from modtrace.data.report import passes
        assert not passes(float("nan"), float("nan"), 1.0, 1.0)

    def test_error_and_skip(self):
        from modtrace.data.report import all_passed
        rows = _rows()
        assert rows[3].status == "error" and not rows[3].passed
        assert rows[4].status == "skipped" and rows[4].passed
        assert not all_passed(rows)
        assert all_passed(rows[:3] + rows[4:])


class TestFiles:
    def test_json_is_sorted_array(self, tmp_path):
        from modtrace.data.report import emit_report
        (path,) = emit_report(_rows()[:1], tmp_path)
        data = json.loads(path.read_text())
        assert isinstance(data, list) and len(data) == 1
        assert list(data[0]) == sorted(data[0])
        assert data[0]["params"] == {"mu": 0.0}

    def test_json_nan_is_null(self, tmp_path):
        from modtrace.data.report import load_report, to_json
        data = json.loads(to_json(_rows()))
        assert data[3]["rel_err"] is None
        assert data[2]["params"] == {"t": [0.5, 1.0]}
        path = tmp_path / "r.json"
        path.write_text(to_json(_rows()))
        again = load_report(path)
        assert math.isnan(again[3].rel_err)
        assert again[3].note.startswith("PoleOnBoundary")

    def test_csv_header_and_values(self, tmp_path):
        from modtrace.data.report import CSV_COLUMNS, emit_report, load_report
        paths = emit_report(_rows(), tmp_path, "both", stem="run")
        assert [p.name for p in paths] == ["run.json", "run.csv"]
        header = paths[1].read_text().splitlines()[0]
        assert header.split(",") == CSV_COLUMNS
        rows = load_report(paths[1])
        assert rows[0].rhs == 1 / (2 * np.pi)
        assert rows[0].passed
        assert not rows[3].passed

    def test_csv_missing_columns(self, tmp_path):
        from modtrace.data.report import load_report
        from modtrace.errors import ConfigInvalid
        path = tmp_path / "bad.csv"
        path.write_text("identity_name,lhs_re\nkms,1.0\n")
        with pytest.raises(ConfigInvalid, match="missing columns"):
            load_report(path)

    def test_json_must_be_array(self, tmp_path):
        from modtrace.data.report import load_report
        from modtrace.errors import ConfigInvalid
        path = tmp_path / "bad.json"
        path.write_text('{"identity_name": "kms"}')
        with pytest.raises(ConfigInvalid, match="array"):
            load_report(path)

    def test_unknown_format(self, tmp_path):
        from modtrace.data.report import emit_report
        with pytest.raises(ValueError, match="format"):
            emit_report([], tmp_path, "xml")

    def test_series(self, tmp_path):
        import pandas as pd

        from modtrace.data.report import emit_series
        points = np.linspace(-1, 1, 5)
        path = emit_series("cutoff_density_0", "lambda", points, np.exp(points) + 0j, tmp_path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["lambda", "value"]
        assert frame["value"].iloc[-1] == pytest.approx(np.e)
        with pytest.raises(ValueError, match="axis"):
            emit_series("x", "mu", points, points, tmp_path)


def test_table_has_a_row_per_entry():
    from modtrace.data.report import to_table
    table = to_table(_rows(), title="quick")
    assert table.row_count == 5
    assert table.title == "quick"
