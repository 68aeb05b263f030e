"""
modtrace CLI entry point.

Usage:
    modtrace verify configs/acceptance.json      # Run identity suites, write reports
    modtrace trace configs/rational_pole.json    # Boundary/residue summary of one interpolator
    modtrace report outputs/report.json          # Re-render a saved report
    modtrace suite list                          # Registered suites
    modtrace config set grid.T 20                # Configuration
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from modtrace import __version__
from modtrace.errors import ConfigInvalid, IoFailure, ModtraceError

app = typer.Typer(
    name="modtrace",
    help=(
        "modtrace: numerical verification of modular theory and Haagerup trace identities.\n\n"
        "Common usage:\n"
        "  modtrace verify configs/acceptance.json\n"
        "  modtrace suite list\n"
        "  modtrace config show"
    ),
    no_args_is_help=True,
)
console = Console()


# ─── Config subcommand ────────────────────────────────────────

config_app = typer.Typer(help="Manage modtrace configuration")
app.add_typer(config_app, name="config")


@config_app.command("set")
def config_set(key: str, value: str):
    """Set a configuration value."""
    from modtrace.harness.config import Config
    cfg = Config.load()
    try:
        cfg.set(key, value)
    except ValueError as exc:
        console.print(f"[red]{exc}[/red]")
        raise typer.Exit(code=2)
    cfg.save()
    console.print(f"  [green]Set[/green] {key} = {value}")


@config_app.command("get")
def config_get(key: str):
    """Get a configuration value."""
    from modtrace.harness.config import Config
    cfg = Config.load()
    console.print(f"  {key} = {cfg.get(key)}")


@config_app.command("show")
def config_show():
    """Show all configuration."""
    from modtrace.harness.config import Config
    console.print(Config.load().to_table())


@config_app.command("validate")
def config_validate():
    """Validate configuration and report issues."""
    from modtrace.harness.config import Config
    issues = Config.load().validate()
    if not issues:
        console.print("[green]Configuration is valid.[/green]")
        return
    console.print(f"[yellow]Found {len(issues)} issue(s):[/yellow]")
    for issue in issues:
        console.print(f"  - {issue}")
    raise typer.Exit(code=2)


# ─── Doctor command ───────────────────────────────────────────

@app.command("doctor")
def doctor_cmd():
    """Run environment and configuration health checks."""
    from modtrace.harness.config import Config
    from modtrace.harness.doctor import has_errors, run_checks, to_table

    checks = run_checks(Config.load())
    console.print(to_table(checks))

    if has_errors(checks):
        console.print("\n[red]Blocking issues found.[/red] Fix errors above, then rerun `modtrace doctor`.")
        raise typer.Exit(code=1)
    console.print("\n[green]No blocking issues.[/green]")


# ─── Suite subcommand ─────────────────────────────────────────

suite_app = typer.Typer(help="Inspect identity suites")
app.add_typer(suite_app, name="suite")


@suite_app.command("list")
def suite_list():
    """List all registered suites."""
    from modtrace.suites import ensure_loaded, registry, suite_load_errors
    ensure_loaded()
    console.print(registry.list_suites_table())
    errors = suite_load_errors()
    if errors:
        console.print(f"[yellow]Warning:[/yellow] {len(errors)} suite module(s) failed to load")


# ─── Verify command ───────────────────────────────────────────

@app.command("verify")
def verify_cmd(
    config_path: Path = typer.Argument(help="Experiment config (JSON)"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report directory (default: output.dir)"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="json | csv | both (default: output.format)"),
    plots: bool = typer.Option(False, "--plots", help="Also write the config's plot series"),
    grid_T: Optional[float] = typer.Option(None, "--grid-T", help="Override the time grid half width"),
    grid_dt: Optional[float] = typer.Option(None, "--grid-dt", help="Override the time grid step"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the run seed"),
    tol_scale: float = typer.Option(1.0, "--tol-scale", help="Multiply every tolerance"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Experiments run at once (default: run.jobs)"),
):
    """Run the experiments of a config and write the report."""
    from modtrace.data.report import all_passed, emit_report, to_table
    from modtrace.harness.config import Config
    from modtrace.harness.executor import emit_plots, run_suite
    from modtrace.harness.experiment import RunOverrides, load_experiment_config

    cfg = Config.load()
    overrides = RunOverrides(grid_T=grid_T, grid_dt=grid_dt, seed=seed, tol_scale=tol_scale)
    try:
        experiment = load_experiment_config(config_path, cfg, overrides)
    except (ConfigInvalid, IoFailure, ValueError) as exc:
        console.print(f"[red]Invalid config:[/red] {exc}")
        raise typer.Exit(code=2)

    fmt = (fmt or cfg.get("output.format")).lower()
    if fmt not in {"json", "csv", "both"}:
        console.print(f"[red]Unknown format '{fmt}'.[/red] Use json, csv or both.")
        raise typer.Exit(code=2)
    out_dir = output or Path(cfg.get("output.dir"))
    jobs = jobs or int(cfg.get("run.jobs"))

    total = len(experiment.experiments)
    done = []
    with console.status(f"[bold cyan]Running {total} experiment(s)...[/bold cyan]") as status:
        def on_done(entry, rows):
            done.append(entry.name)
            status.update(f"[bold cyan]{len(done)}/{total}[/bold cyan] {entry.name}")

        try:
            rows = run_suite(experiment, jobs=jobs, on_done=on_done)
        except ValueError as exc:
            console.print(f"[red]{exc}[/red]")
            raise typer.Exit(code=2)

    if rows:
        console.print(to_table(rows, title=f"modtrace report: {config_path.name}"))
    else:
        console.print("  [dim]No experiments configured.[/dim]")

    try:
        written = emit_report(rows, out_dir, fmt)
        if plots and experiment.plots:
            written += emit_plots(experiment, out_dir)
    except IoFailure as exc:
        console.print(f"[red]{exc}[/red]")
        raise typer.Exit(code=2)
    for path in written:
        console.print(f"  [dim]wrote {path}[/dim]")

    failed = sum(1 for r in rows if not r.passed)
    if not all_passed(rows):
        console.print(f"\n[red]{failed} of {len(rows)} row(s) failed.[/red]")
        raise typer.Exit(code=1)
    console.print(f"\n[green]All {len(rows)} row(s) passed.[/green]")


# ─── Trace command ────────────────────────────────────────────

@app.command("trace")
def trace_cmd(
    spec_path: Path = typer.Argument(help="Interpolator file (JSON)"),
    grid_T: Optional[float] = typer.Option(None, "--grid-T", help="Override the time grid half width"),
    grid_dt: Optional[float] = typer.Option(None, "--grid-dt", help="Override the time grid step"),
):
    """Boundary vector, residue operator and trace formula of one interpolator."""
    from modtrace.calculus.crossed_product import trace_formula_theorem_check
    from modtrace.calculus.interpolators import (
        ContourRule,
        LambdaGrid,
        boundary_vector,
        load_spec,
        residue_operator,
    )
    from modtrace.calculus.sections import TimeGrid
    from modtrace.harness.config import Config, Tolerances

    cfg = Config.load()
    try:
        spec = load_spec(spec_path, **Tolerances.resolve(cfg).functional_options)
        grid = TimeGrid(float(grid_T or cfg.get("grid.T")), float(grid_dt or cfg.get("grid.dt")))
        lambda_grid = LambdaGrid(float(cfg.get("lambda.L")), float(cfg.get("lambda.dlambda")))
        rule = ContourRule(int(cfg.get("contour.points")), float(cfg.get("contour.radius")),
                           float(cfg.get("contour.pole_margin")))
    except (ConfigInvalid, IoFailure, ValueError) as exc:
        console.print(f"[red]Invalid interpolator:[/red] {exc}")
        raise typer.Exit(code=2)

    table = Table(title=f"modtrace trace: {spec_path.name}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value")
    table.add_row("algebra", str(list(spec.algebra.blocks)))
    table.add_row("terms", ", ".join(t.envelope.kind for t in spec.terms))
    table.add_row("strip (depth)", f"[{spec.strip[0]:g}, {spec.strip[1]:g}]")
    table.add_row("poles", ", ".join(f"{p:.6g}" for p, _ in spec.poles) or "-")

    try:
        vector = boundary_vector(spec, grid, rule)
        table.add_row("||f tau^(1/2)||^2", f"{vector.norm() ** 2:.12g}")
        residue = residue_operator(spec, lambda_grid, rule)
        table.add_row("||R_f||", f"{float(np.linalg.norm(residue.matrix, 2)):.6g}")
        check = trace_formula_theorem_check(spec, grid, lambda_grid, rule)
        table.add_row("tau((f + R_f)*(f + R_f))", f"{complex(check.lhs).real:.12g}")
        table.add_row("relative gap", f"{check.rel_err:.2e}")
        if check.expected is not None:
            table.add_row("closed form", f"{complex(check.expected).real:.12g}")
    except ModtraceError as exc:
        table.add_row("[yellow]stopped[/yellow]", f"{type(exc).__name__}: {exc}")
    console.print(table)


# ─── Report command ───────────────────────────────────────────

@app.command("report")
def report_cmd(
    path: Path = typer.Argument(help="Saved report (.json or .csv)"),
    fmt: str = typer.Option("table", "--format", "-f", help="table | json | csv"),
):
    """Re-render or convert a saved report."""
    from modtrace.data.report import load_report, to_frame, to_json, to_table

    try:
        rows = load_report(path)
    except (ConfigInvalid, IoFailure) as exc:
        console.print(f"[red]{exc}[/red]")
        raise typer.Exit(code=2)

    fmt = fmt.lower()
    if fmt == "table":
        console.print(to_table(rows, title=f"modtrace report: {path.name}"))
    elif fmt == "json":
        sys.stdout.write(to_json(rows))
    elif fmt == "csv":
        to_frame(rows).to_csv(sys.stdout, index=False, float_format="%.17g")
    else:
        console.print(f"[red]Unknown format '{fmt}'.[/red] Use table, json or csv.")
        raise typer.Exit(code=2)


# ─── Version command ──────────────────────────────────────────

@app.command("version")
def version_cmd():
    """Show modtrace version."""
    console.print(f"modtrace-cli v{__version__}")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output")):
    """modtrace: modular theory and crossed-product trace verification."""
    _configure_logging(verbose)


def _configure_logging(verbose: bool):
    logger = logging.getLogger("modtrace")
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))


def entry():
    """Package entry point."""
    app()
