"""
Experiment configuration files.

An experiment config is a JSON object:

    {
      "algebra": {"blocks": [2]},
      "states": {"omega": {"diag": [0.75, 0.25]},
                 "phi": {"random": true, "seed": 7, "rank": 2, "mass": 1.0}},
      "seed": 0,
      "grid": {"T": 40.0, "dt": 0.01},
      "lambda_grid": {"L": 60.0, "dlambda": 0.01},
      "experiments": [{"name": "haagerup_trace", "params": {"mu": [0, 0.5, 1]}}],
      "tolerances": {"haagerup": 1e-5},
      "plots": [{"name": "cutoff_density", "params": {"mu": 1}}]
    }

Everything except ``experiments`` is optional. Validation errors raise
ConfigInvalid naming the offending field and, where it can be found, the line
of the offending value.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np

from modtrace.calculus.algebra import FiniteAlgebra, Functional, _decode
from modtrace.calculus.interpolators import ContourRule, LambdaGrid
from modtrace.calculus.sampling import make_rng, random_functional
from modtrace.calculus.sections import TimeGrid
from modtrace.errors import ConfigInvalid, IoFailure, ModtraceError
from modtrace.harness.config import Config, Tolerances

logger = logging.getLogger("modtrace.harness.experiment")

PLOT_SERIES = frozenset({"boundary_norm", "cutoff_density", "spectral_density"})
_TOP_LEVEL = frozenset({"algebra", "states", "seed", "grid", "lambda_grid", "contour",
                        "experiments", "tolerances", "plots"})


@dataclass(frozen=True)
class ExperimentEntry:
    name: str
    params: dict
    index: int


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    algebra: FiniteAlgebra
    states: dict
    grid: TimeGrid
    lambda_grid: LambdaGrid
    contour: ContourRule
    experiments: tuple
    tolerances: Tolerances
    seed: int = 0
    plots: tuple = ()
    source: Optional[Path] = None

    def state(self, name: Optional[str] = None) -> Functional:
        """Named state; without a name the first declared state, else the normalised trace."""
        if name is not None:
            try:
                return self.states[name]
            except KeyError:
                raise ConfigInvalid(f"Unknown state '{name}'", field=f"states.{name}") from None
        if self.states:
            return next(iter(self.states.values()))
        d = self.algebra.dim
        return Functional(self.algebra, np.eye(d) / d, **self.tolerances.functional_options)


@dataclass(frozen=True)
class RunOverrides:
    """Command-line overrides; None leaves the config value alone."""

    grid_T: Optional[float] = None
    grid_dt: Optional[float] = None
    seed: Optional[int] = None
    tol_scale: float = 1.0


def _locate(text: Optional[str], value: Any) -> tuple[Optional[int], Optional[int]]:
    """Line and column of the first occurrence of ``value`` rendered as JSON."""
    if not text:
        return None, None
    needle = json.dumps(value)
    pos = text.find(needle)
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    column = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, column


class _Validator:
    def __init__(self, text: Optional[str]):
        self.text = text

    def fail(self, message: str, where: str, value: Any = None) -> ConfigInvalid:
        line, column = _locate(self.text, value) if value is not None else (None, None)
        return ConfigInvalid(message, field=where, line=line, column=column)

    def positive(self, data: dict, key: str, where: str, default: float) -> float:
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise self.fail(f"'{key}' must be a positive number, got {value!r}", f"{where}.{key}", key)
        return float(value)

    def mapping(self, data: Any, where: str) -> dict:
        if not isinstance(data, dict):
            raise self.fail(f"Expected an object, got {type(data).__name__}", where)
        return data


def _parse_algebra(v: _Validator, data: dict) -> FiniteAlgebra:
    algebra = v.mapping(data.get("algebra", {"blocks": [2]}), "algebra")
    blocks = algebra.get("blocks")
    if (not isinstance(blocks, list) or not blocks
            or any(isinstance(b, bool) or not isinstance(b, int) or b < 1 for b in blocks)):
        raise v.fail(f"'blocks' must be a non-empty list of positive integers, got {blocks!r}",
                     "algebra.blocks", "blocks")
    return FiniteAlgebra(tuple(blocks))


def _parse_state(v: _Validator, algebra: FiniteAlgebra, name: str, entry: Any,
                 tolerances: Tolerances) -> Functional:
    where = f"states.{name}"
    options = tolerances.functional_options
    entry = v.mapping(entry, where)
    try:
        if entry.get("random"):
            seed = entry.get("seed")
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise v.fail("Random states need an integer 'seed'", f"{where}.seed", name)
            rank = entry.get("rank")
            mass = float(entry.get("mass", 1.0))
            return random_functional(make_rng(seed), algebra, rank=rank, mass=mass, **options)
        if "diag" in entry:
            weights = entry["diag"]
            if len(weights) != algebra.dim:
                raise v.fail(f"'diag' needs {algebra.dim} entries, got {len(weights)}",
                             f"{where}.diag", name)
            return Functional.diagonal(weights, algebra, **options)
        if "density" in entry:
            return Functional.from_blocks(algebra, [_decode(b) for b in entry["density"]], **options)
    except ConfigInvalid:
        raise
    except (ModtraceError, ValueError, TypeError) as exc:
        raise v.fail(str(exc), where, name) from exc
    raise v.fail("A state needs 'diag', 'density' or 'random'", where, name)


def _parse_entries(v: _Validator, data: Any, where: str, allowed) -> tuple:
    """Entries named from ``allowed``; a mapping also restricts each entry's params."""
    if data is None:
        return ()
    if not isinstance(data, list):
        raise v.fail(f"'{where}' must be a list", where, where)
    entries = []
    for i, item in enumerate(data):
        item = v.mapping(item, f"{where}[{i}]")
        name = item.get("name")
        if not isinstance(name, str) or name not in allowed:
            raise v.fail(f"Unknown name {name!r}; valid: {', '.join(sorted(allowed))}",
                         f"{where}[{i}].name", name if isinstance(name, str) else None)
        params = item.get("params", {})
        if not isinstance(params, dict):
            raise v.fail("'params' must be an object", f"{where}[{i}].params")
        accepted = allowed.get(name) if isinstance(allowed, Mapping) else None
        unknown = sorted(set(params) - accepted) if accepted is not None else []
        if unknown:
            raise v.fail(f"Unknown parameter(s) for {name}: {', '.join(unknown)}",
                         f"{where}[{i}].params.{unknown[0]}", unknown[0])
        entries.append(ExperimentEntry(name, params, i))
    return tuple(entries)


def _parse_tolerances(v: _Validator, data: dict, user: Config, scale: float) -> Tolerances:
    tolerance_data = v.mapping(data.get("tolerances", {}), "tolerances")
    try:
        return Tolerances.resolve(user, tolerance_data, scale)
    except (TypeError, ValueError) as exc:
        bad = next((k for k in tolerance_data if k not in Tolerances.__dataclass_fields__), None)
        where = f"tolerances.{bad}" if bad else "tolerances"
        raise v.fail(str(exc), where, bad) from exc

def parse_experiment_config(data: Any, user: Optional[Config] = None,
                            overrides: RunOverrides = RunOverrides(),
                            text: Optional[str] = None, source: Optional[Path] = None,
                            suites: Optional[Mapping[str, frozenset]] = None) -> ExperimentConfig:
    """Validate a decoded config.

    ``suites`` maps suite names to their parameter names and defaults to the
    registry.
    """
    user = user or Config()
    v = _Validator(text)
    data = v.mapping(data, "<root>")
    for key in data:
        if key not in _TOP_LEVEL:
            raise v.fail(f"Unknown key '{key}'", key, key)

    if suites is None:
        from modtrace.suites import ensure_loaded, registry

        ensure_loaded()
        suites = {s.name: frozenset(s.parameters) for s in registry.list_suites()}

    algebra = _parse_algebra(v, data)
    tolerances = _parse_tolerances(v, data, user, overrides.tol_scale)
    states = {name: _parse_state(v, algebra, name, entry, tolerances)
              for name, entry in v.mapping(data.get("states", {}), "states").items()}

    grid_data = v.mapping(data.get("grid", {}), "grid")
    T = overrides.grid_T or v.positive(grid_data, "T", "grid", user.get("grid.T"))
    dt = overrides.grid_dt or v.positive(grid_data, "dt", "grid", user.get("grid.dt"))
    lam = v.mapping(data.get("lambda_grid", {}), "lambda_grid")
    contour = v.mapping(data.get("contour", {}), "contour")
    try:
        grid = TimeGrid(float(T), float(dt))
        lambda_grid = LambdaGrid(v.positive(lam, "L", "lambda_grid", user.get("lambda.L")),
                                 v.positive(lam, "dlambda", "lambda_grid", user.get("lambda.dlambda")))
        rule = ContourRule(int(v.positive(contour, "points", "contour", user.get("contour.points"))),
                           v.positive(contour, "radius", "contour", user.get("contour.radius")),
                           v.positive(contour, "pole_margin", "contour", user.get("contour.pole_margin")))
    except ValueError as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise v.fail(str(exc), "grid") from exc

    seed = data.get("seed", user.get("run.seed"))
    if overrides.seed is not None:
        seed = overrides.seed
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise v.fail(f"'seed' must be a non-negative integer, got {seed!r}", "seed", "seed")

    if "experiments" not in data:
        raise v.fail("Missing 'experiments' list", "experiments")
    experiments = _parse_entries(v, data["experiments"], "experiments", suites)
    plots = _parse_entries(v, data.get("plots"), "plots", PLOT_SERIES)

    logger.debug("config: %d experiments, grid T=%s dt=%s", len(experiments), T, dt)
    return ExperimentConfig(algebra, states, grid, lambda_grid, rule, experiments,
                            tolerances, seed, plots, source)


def load_experiment_config(path: Union[str, Path], user: Optional[Config] = None,
                           overrides: RunOverrides = RunOverrides()) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"Cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return parse_experiment_config(data, user, overrides, text=text, source=path)


@dataclass
class RunContext:
    """What a suite sees: the parsed config plus per-experiment randomness."""

    config: ExperimentConfig
    entry: ExperimentEntry = field(default_factory=lambda: ExperimentEntry("", {}, 0))

    @property
    def tol(self) -> Tolerances:
        return self.config.tolerances

    @property
    def grid(self) -> TimeGrid:
        return self.config.grid

    @property
    def lambda_grid(self) -> LambdaGrid:
        return self.config.lambda_grid

    @property
    def contour(self) -> ContourRule:
        return self.config.contour

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.config.algebra

    def state(self, name: Optional[str] = None) -> Functional:
        return self.config.state(name)

    def rng(self, salt: int = 0) -> np.random.Generator:
        """Generator seeded by (run seed, experiment index, salt), independent of scheduling."""
        return np.random.default_rng([self.config.seed, self.entry.index, salt])
