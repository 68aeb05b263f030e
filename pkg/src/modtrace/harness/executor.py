"""
Suite executor: runs the configured experiments, isolates failures, keeps order.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from modtrace.calculus.interpolators import (
    GaussianPoly,
    LambdaGrid,
    RationalPole,
    boundary_vector,
    cutoff_above,
    simple_spec,
)
from modtrace.data.report import ReportRow, emit_series
from modtrace.errors import SkipExperiment
from modtrace.harness.experiment import ExperimentConfig, ExperimentEntry, RunContext
from modtrace.suites import as_complex, ensure_loaded, registry

logger = logging.getLogger("modtrace.harness.executor")


def run_suite(config: ExperimentConfig, jobs: int = 1,
              on_done: Optional[Callable[[ExperimentEntry, list], None]] = None) -> list[ReportRow]:
    """Run every experiment of ``config``; rows come back in experiment order.

    Up to ``jobs`` experiments run at once. An exception inside one experiment
    becomes a single error row and never touches its siblings.
    """
    ensure_loaded()
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    entries = list(config.experiments)
    if not entries:
        return []

    if jobs == 1:
        batches = []
        for entry in entries:
            batches.append(_run_entry(config, entry))
            if on_done:
                on_done(entry, batches[-1])
    else:
        with ThreadPoolExecutor(max_workers=jobs, thread_name_prefix="modtrace") as pool:
            futures = [pool.submit(_run_entry, config, entry) for entry in entries]
            batches = []
            for entry, future in zip(entries, futures):
                batches.append(future.result())
                if on_done:
                    on_done(entry, batches[-1])
    return [row for batch in batches for row in batch]


def _run_entry(config: ExperimentConfig, entry: ExperimentEntry) -> list[ReportRow]:
    """Execute one experiment with error capture."""
    suite = registry.get_suite(entry.name)
    if suite is None:
        return [ReportRow.error(entry.name, f"Suite '{entry.name}' not found.", entry.params)]

    started = time.perf_counter()
    try:
        rows = list(suite.run(RunContext(config, entry), **entry.params))
    except SkipExperiment as exc:
        logger.info("Suite %s skipped: %s", entry.name, exc)
        rows = [ReportRow.skipped(entry.name, str(exc), entry.params)]
    except Exception as exc:
        logger.warning("Suite %s failed: %s", entry.name, exc)
        rows = [ReportRow.error(entry.name, f"{type(exc).__name__}: {exc}", entry.params)]
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    for row in rows:
        if not row.wall_time_ms:
            row.wall_time_ms = elapsed_ms / len(rows)
    return rows


# ─── plot series ─────────────────────────────────────────────


def emit_plots(config: ExperimentConfig, out_dir) -> list:
    """Write every requested plot series of ``config`` as a two-column CSV."""
    written = []
    for entry in config.plots:
        name, points, values = _series(config, entry)
        written.append(emit_series(f"{name}_{entry.index}", "t" if name == "boundary_norm" else "lambda",
                                   points, values, out_dir))
        logger.debug("series %s: %d points", name, len(points))
    return written


def _series(config: ExperimentConfig, entry: ExperimentEntry):
    params = dict(entry.params)
    phi = config.state(params.get("state"))
    if entry.name == "boundary_norm":
        if "mu" in params:
            envelope = RationalPole(as_complex(params["mu"]), float(params.get("coeff", 1.0)))
        else:
            envelope = GaussianPoly(float(params.get("alpha", 1.0)), as_complex(params.get("beta", 0.0)))
        vector = boundary_vector(simple_spec(envelope, phi), config.grid, config.contour)
        return entry.name, config.grid.points, vector.pointwise_norms()

    grid = LambdaGrid(float(params.get("L", config.lambda_grid.L)),
                      float(params.get("dlambda", config.lambda_grid.dlambda)))
    if entry.name == "cutoff_density":
        return entry.name, grid.points, cutoff_above(grid, as_complex(params.get("mu", 0.0))).weighted()
    envelope = GaussianPoly(float(params.get("alpha", 1.0)), as_complex(params.get("beta", 0.0)))
    transform = envelope.fourier(config.grid, grid.points)
    density = phi.total_mass / (2 * np.pi) * np.abs(transform) ** 2 * np.exp(grid.points)
    return entry.name, grid.points, density
