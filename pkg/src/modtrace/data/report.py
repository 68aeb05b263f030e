"""
Report rows and report files.

A row compares two routes (lhs, rhs) to one quantity. pass means
rel_err <= tol, or abs_err <= tol when rhs is zero. Rows are written as a
JSON array (sorted keys) and as CSV with a fixed header; plot series are
two-column CSV files.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from rich.table import Table

from modtrace.errors import ConfigInvalid, IoFailure

logger = logging.getLogger("modtrace.data.report")

CSV_COLUMNS = ["identity_name", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
               "abs_err", "rel_err", "tol", "pass", "wall_time_ms"]


def passes(abs_err: float, rel_err: float, rhs: complex, tol: float) -> bool:
    if not (math.isfinite(abs_err) and math.isfinite(rel_err)):
        return False
    return abs_err <= tol if rhs == 0 else rel_err <= tol


@dataclass
class ReportRow:
    identity_name: str
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    tol: float
    passed: bool
    params: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0
    status: str = "ok"
    note: str = ""

    @classmethod
    def compare(cls, name: str, lhs: complex, rhs: complex, tol: float,
                params: Optional[dict] = None, note: str = "") -> "ReportRow":
        """lhs and rhs are two routes to the same value."""
        lhs, rhs = complex(lhs), complex(rhs)
        abs_err = abs(lhs - rhs)
        rel_err = abs_err / abs(rhs) if rhs != 0 else abs_err
        return cls(name, lhs, rhs, abs_err, rel_err, tol, passes(abs_err, rel_err, rhs, tol),
                   dict(params or {}), note=note)

    @classmethod
    def bound(cls, name: str, value: float, limit: float, tol: float,
              params: Optional[dict] = None, note: str = "") -> "ReportRow":
        """value <= limit; the error is the excess over the limit."""
        value, limit = float(value), float(limit)
        abs_err = max(0.0, value - limit)
        rel_err = abs_err / abs(limit) if limit != 0 else abs_err
        return cls(name, complex(value), complex(limit), abs_err, rel_err, tol,
                   passes(abs_err, rel_err, limit, tol), dict(params or {}), note=note)

    @classmethod
    def expectation(cls, name: str, residual: float, tol: float,
                    params: Optional[dict] = None, note: str = "") -> "ReportRow":
        """A residual expected to vanish (rhs = 0)."""
        return cls.compare(name, residual, 0.0, tol, params, note)

    @classmethod
    def error(cls, name: str, message: str, params: Optional[dict] = None) -> "ReportRow":
        nan = float("nan")
        return cls(name, complex(nan, nan), complex(nan, nan), nan, nan, nan, False,
                   dict(params or {}), status="error", note=message)

    @classmethod
    def skipped(cls, name: str, reason: str, params: Optional[dict] = None) -> "ReportRow":
        nan = float("nan")
        return cls(name, complex(nan, nan), complex(nan, nan), nan, nan, nan, True,
                   dict(params or {}), status="skipped", note=reason)

    def to_record(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "lhs_re": self.lhs.real, "lhs_im": self.lhs.imag,
            "rhs_re": self.rhs.real, "rhs_im": self.rhs.imag,
            "abs_err": self.abs_err, "rel_err": self.rel_err, "tol": self.tol,
            "pass": self.passed, "wall_time_ms": self.wall_time_ms,
        }

    def to_dict(self) -> dict:
        record = self.to_record()
        record.update(status=self.status, note=self.note, params=_jsonable(self.params))
        return record

    @classmethod
    def from_dict(cls, data: dict) -> "ReportRow":
        return cls(
            identity_name=str(data["identity_name"]),
            lhs=complex(_num(data["lhs_re"]), _num(data["lhs_im"])),
            rhs=complex(_num(data["rhs_re"]), _num(data["rhs_im"])),
            abs_err=_num(data["abs_err"]), rel_err=_num(data["rel_err"]), tol=_num(data["tol"]),
            passed=_as_bool(data["pass"]),
            params=dict(data.get("params") or {}),
            wall_time_ms=_num(data.get("wall_time_ms", 0.0)),
            status=str(data.get("status", "ok")),
            note=str(data.get("note", "") if data.get("note") is not None else ""),
        )


def _num(value) -> float:
    return float("nan") if value is None else float(value)


def _as_bool(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in {"true", "1", "yes"}
    return bool(value)


def _jsonable(value):
    """Params echo: complex numbers as [re, im], arrays as lists."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    return value


def all_passed(rows: Iterable[ReportRow]) -> bool:
    return all(r.passed for r in rows)


# ─── emit / load ─────────────────────────────────────────────


def _json_float(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_json(rows: Sequence[ReportRow]) -> str:
    records = [{k: _json_float(v) for k, v in r.to_dict().items()} for r in rows]
    return json.dumps(records, indent=2, sort_keys=True) + "\n"


def to_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    return pd.DataFrame([r.to_record() for r in rows], columns=CSV_COLUMNS)


def emit_report(rows: Sequence[ReportRow], out_dir: Union[str, Path], fmt: str = "json",
                stem: str = "report") -> list[Path]:
    """Write ``rows`` as JSON, CSV or both; returns the written paths."""
    if fmt not in {"json", "csv", "both"}:
        raise ValueError(f"Unknown report format {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt in {"json", "both"}:
            path = out_dir / f"{stem}.json"
            path.write_text(to_json(rows), encoding="utf-8")
            written.append(path)
        if fmt in {"csv", "both"}:
            path = out_dir / f"{stem}.csv"
            to_frame(rows).to_csv(path, index=False, float_format="%.17g")
            written.append(path)
    except OSError as exc:
        raise IoFailure(f"Cannot write report to {out_dir}: {exc}") from exc
    logger.info("wrote %d rows to %s", len(rows), ", ".join(str(p) for p in written))
    return written


def load_report(path: Union[str, Path]) -> list[ReportRow]:
    """Read a report written by emit_report (JSON or CSV by suffix)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            frame = pd.read_csv(path, float_precision="round_trip")
            missing = [c for c in CSV_COLUMNS if c not in frame.columns]
            if missing:
                raise ConfigInvalid(f"Report is missing columns {missing}", field="header")
            records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
            return [ReportRow.from_dict(r) for r in records]
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"Cannot read report {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, list):
        raise ConfigInvalid("A report is a JSON array of rows")
    return [ReportRow.from_dict(r) for r in data]


def emit_series(name: str, axis: str, points: np.ndarray, values: np.ndarray,
                out_dir: Union[str, Path]) -> Path:
    """Two-column CSV (axis, value) for plotting."""
    if axis not in {"t", "lambda"}:
        raise ValueError(f"Series axis must be 't' or 'lambda', got {axis!r}")
    path = Path(out_dir) / f"{name}.csv"
    frame = pd.DataFrame({axis: np.asarray(points, dtype=float),
                          "value": np.real_if_close(np.asarray(values)).real})
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g")
    except OSError as exc:
        raise IoFailure(f"Cannot write series {path}: {exc}") from exc
    return path


def to_table(rows: Sequence[ReportRow], title: str = "modtrace report") -> Table:
    table = Table(title=title)
    table.add_column("Identity", style="cyan")
    table.add_column("lhs")
    table.add_column("rhs")
    table.add_column("rel err", justify="right")
    table.add_column("tol", justify="right", style="dim")
    table.add_column("Status")
    table.add_column("ms", justify="right", style="dim")

    for row in rows:
        if row.status == "error":
            icon = "[red]✗ error[/red]"
        elif row.status == "skipped":
            icon = "[dim]○ skipped[/dim]"
        elif row.passed:
            icon = "[green]✓[/green]"
        else:
            icon = "[red]✗[/red]"
        if row.status == "ok":
            table.add_row(row.identity_name, _fmt(row.lhs), _fmt(row.rhs), f"{row.rel_err:.2e}",
                          f"{row.tol:.0e}", icon, f"{row.wall_time_ms:.0f}")
        else:
            table.add_row(row.identity_name, "-", "-", "-", "-", icon + f" {row.note}",
                          f"{row.wall_time_ms:.0f}")
    return table


def _fmt(z: complex) -> str:
    if abs(z.imag) <= 1e-14 * max(1.0, abs(z.real)):
        return f"{z.real:.10g}"
    return f"{z.real:.8g}{z.imag:+.8g}j"
