"""
Health checks for modtrace.
"""

from __future__ import annotations

import importlib
import sys

from rich.table import Table

from modtrace.harness.config import Config

_CORE = ("numpy", "scipy", "pandas", "rich", "typer", "dotenv")
_OPTIONAL = (("hypothesis", "hypothesis (property tests)"), ("pytest", "pytest"))


def _package(name: str) -> tuple[bool, str]:
    try:
        module = importlib.import_module(name)
    except ImportError:
        return False, "not installed"
    return True, getattr(module, "__version__", "installed")


def _smoke() -> dict:
    """tau((1 v w)^0) on the quick grids against 1 / 2 pi."""
    from modtrace.calculus.algebra import Functional
    from modtrace.calculus.crossed_product import haagerup_trace
    from modtrace.calculus.interpolators import LambdaGrid
    from modtrace.calculus.sections import TimeGrid

    try:
        result = haagerup_trace(None, Functional.diagonal([0.75, 0.25]), 0.0,
                                TimeGrid(20.0, 0.02), LambdaGrid(40.0, 0.02))
    except Exception as exc:
        return {"name": "Numerical smoke test", "status": "error", "detail": f"{type(exc).__name__}: {exc}"}
    err = abs(result.grid - result.expected) / abs(result.expected)
    status = "ok" if err <= 1e-4 else "warn"
    return {"name": "Numerical smoke test", "status": status,
            "detail": f"Haagerup mu=0 on quick grids, rel err {err:.1e}"}


def run_checks(config: Config) -> list[dict]:
    """Run all health checks. Returns list of check results."""
    checks = []

    py_ver = f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}"
    py_ok = sys.version_info >= (3, 9)
    checks.append({
        "name": "Python version",
        "status": "ok" if py_ok else "error",
        "detail": f"Python {py_ver}" + ("" if py_ok else " (need 3.9+)"),
    })

    for pkg in _CORE:
        ok, detail = _package(pkg)
        checks.append({"name": f"Package: {pkg}", "status": "ok" if ok else "error", "detail": detail})
    for pkg, label in _OPTIONAL:
        ok, detail = _package(pkg)
        checks.append({"name": f"Optional: {label}", "status": "ok" if ok else "info",
                       "detail": detail if ok else "not installed (optional)"})

    issues = config.validate()
    checks.append({
        "name": "Configuration",
        "status": "warn" if issues else "ok",
        "detail": "; ".join(issues) if issues else "valid",
    })

    from modtrace.suites import ensure_loaded, registry, suite_load_errors

    ensure_loaded()
    errors = suite_load_errors()
    if errors:
        checks.append({
            "name": "Suite modules",
            "status": "error",
            "detail": f"{len(errors)} module(s) failed to load: {', '.join(errors)}",
        })
    else:
        checks.append({
            "name": "Suite modules",
            "status": "ok",
            "detail": f"{len(registry.list_suites())} suites loaded",
        })

    checks.append(_smoke())
    return checks


def to_table(checks: list[dict]) -> Table:
    """Render checks as a Rich table."""
    table = Table(title="modtrace doctor")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Detail")

    icons = {"ok": "[green]✓[/green]", "warn": "[yellow]⚠[/yellow]", "info": "[dim]○[/dim]"}
    for check in checks:
        table.add_row(check["name"], icons.get(check["status"], "[red]✗[/red]"), check["detail"])
    return table


def has_errors(checks: list[dict]) -> bool:
    """Check if any health check failed."""
    return any(c["status"] == "error" for c in checks)
