"""
Configuration management for modtrace.

Config is stored at ~/.modtrace/config.json and manages:
- numerical tolerances (tol.*)
- default time and lambda grids (grid.*, lambda.*)
- contour quadrature (contour.*)
- run and output preferences (run.*, output.*)

Environment variables MODTRACE_<KEY> (dots as underscores, e.g. MODTRACE_GRID_T)
override the stored values; a .env file in the working directory is honoured.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import load_dotenv
from rich.table import Table

load_dotenv()

CONFIG_DIR = Path.home() / ".modtrace"
CONFIG_FILE = CONFIG_DIR / "config.json"
ENV_PREFIX = "MODTRACE_"
logger = logging.getLogger("modtrace.harness.config")

DEFAULTS = {
    "tol.hermitian": 1e-10,
    "tol.reconstruct": 1e-10,
    "tol.power": 1e-10,
    "tol.support_cutoff": 1e-12,
    "tol.majorize": 1e-8,
    "tol.kms": 1e-10,
    "tol.bound": 1e-10,
    "tol.conv": 1e-9,
    "tol.axiom": 1e-9,
    "tol.corr": 1e-5,
    "tol.haagerup": 1e-5,
    "tol.spectral": 1e-6,
    "tol.residue": 1e-8,
    "tol.assoc": 1e-7,
    "tol.exact": 1e-8,

    "grid.T": 40.0,
    "grid.dt": 0.01,
    "lambda.L": 60.0,
    "lambda.dlambda": 0.01,

    "contour.points": 256,
    "contour.radius": 0.05,
    "contour.pole_margin": 1e-3,

    "run.jobs": 1,
    "run.seed": 0,
    "run.profile": "acceptance",

    "output.dir": "outputs",
    "output.format": "json",
}

PROFILE_PRESETS = {
    "acceptance": {
        "grid.T": 40.0,
        "grid.dt": 0.01,
        "lambda.L": 60.0,
    },
    "quick": {
        "grid.T": 20.0,
        "grid.dt": 0.02,
        "lambda.L": 40.0,
    },
}

OUTPUT_FORMATS = frozenset({"json", "csv", "both"})
_POSITIVE_KEYS = frozenset(k for k, v in DEFAULTS.items()
                           if isinstance(v, (int, float)) and not isinstance(v, bool) and k != "run.seed")


def _env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "_").upper()


def _coerce(key: str, value: Any) -> Any:
    """Parse ``value`` to the type of the default for ``key``."""
    default = DEFAULTS.get(key)
    if isinstance(default, bool) or default is None or isinstance(default, str):
        return value
    try:
        number = int(value) if isinstance(default, int) else float(value)
    except (TypeError, ValueError):
        raise ValueError(f"'{key}' must be numeric, got {value!r}") from None
    if key in _POSITIVE_KEYS and not number > 0:
        raise ValueError(f"'{key}' must be positive, got {number}")
    if key == "run.seed" and number < 0:
        raise ValueError(f"'run.seed' must be non-negative, got {number}")
    return number


class Config:
    """Manages modtrace configuration."""

    def __init__(self, data: dict = None):
        self._data = data or {}

    @classmethod
    def load(cls) -> "Config":
        """Load config from ~/.modtrace/config.json, falling back to defaults."""
        if CONFIG_FILE.exists():
            try:
                raw = json.loads(CONFIG_FILE.read_text())
                return cls(data=raw)
            except (json.JSONDecodeError, OSError) as exc:
                logger.warning("Failed to load config: %s", exc)
        return cls()

    def save(self):
        """Persist config to ~/.modtrace/config.json."""
        CONFIG_DIR.mkdir(parents=True, exist_ok=True)
        CONFIG_FILE.write_text(json.dumps(self._data, indent=2, sort_keys=True) + "\n")

    def _env(self, key: str) -> Optional[str]:
        return os.environ.get(_env_name(key))

    def get(self, key: str, default: Any = None) -> Any:
        """Environment, then stored value, then DEFAULTS, then ``default``."""
        env = self._env(key)
        if env is not None:
            try:
                return _coerce(key, env)
            except ValueError as exc:
                logger.warning("Ignoring %s: %s", _env_name(key), exc)
        if key in self._data:
            return self._data[key]
        if key in DEFAULTS:
            return DEFAULTS[key]
        return default

    def source(self, key: str) -> str:
        if self._env(key) is not None:
            return "env"
        return "config" if key in self._data else "default"

    def set(self, key: str, value: Any):
        """Set a config value.

        Special handling:
        - numeric keys: parsed, and must be positive (seed: non-negative).
        - run.profile: applies the profile's grid presets.
        - output.format: one of json, csv, both.
        """
        if key == "run.profile":
            preset = PROFILE_PRESETS.get(value)
            if not preset:
                raise ValueError(
                    f"Unknown profile '{value}'. Valid: {', '.join(sorted(PROFILE_PRESETS))}"
                )
            for pk, pv in preset.items():
                self._data[pk] = pv
        elif key == "output.format":
            norm = str(value).strip().lower()
            if norm not in OUTPUT_FORMATS:
                raise ValueError(f"output.format must be one of: {', '.join(sorted(OUTPUT_FORMATS))}")
            value = norm
        elif key in DEFAULTS:
            value = _coerce(key, value)
        else:
            logger.warning("Setting unknown config key '%s'", key)
        self._data[key] = value

    def validate(self) -> list[str]:
        """Validate configuration and return a list of issues."""
        issues = []
        known_keys = set(DEFAULTS.keys())
        for key in self._data:
            if key not in known_keys:
                issues.append(f"Unknown config key '{key}' (possible typo)")
        for key, value in self._data.items():
            if key not in DEFAULTS or value is None:
                continue
            default = DEFAULTS[key]
            if isinstance(default, str):
                if not isinstance(value, str):
                    issues.append(f"'{key}' should be str, got {type(value).__name__}")
                continue
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                issues.append(f"'{key}' should be numeric, got {type(value).__name__}")
            elif key in _POSITIVE_KEYS and value <= 0:
                issues.append(f"'{key}' should be positive, got {value}")
        profile = self._data.get("run.profile")
        if profile is not None and profile not in PROFILE_PRESETS:
            issues.append(f"Unknown profile '{profile}'")
        fmt = self._data.get("output.format")
        if fmt is not None and fmt not in OUTPUT_FORMATS:
            issues.append(f"Unknown output format '{fmt}'")
        return issues

    def to_table(self) -> Table:
        """Render config as a Rich table."""
        table = Table(title="modtrace Configuration")
        table.add_column("Key", style="cyan")
        table.add_column("Value")
        table.add_column("Source", style="dim")

        for key in sorted(DEFAULTS):
            table.add_row(key, str(self.get(key)), self.source(key))
        return table


@dataclass(frozen=True)
class Tolerances:
    """Resolved tolerances for one run (already multiplied by the tolerance scale)."""

    hermitian: float = DEFAULTS["tol.hermitian"]
    reconstruct: float = DEFAULTS["tol.reconstruct"]
    power: float = DEFAULTS["tol.power"]
    support_cutoff: float = DEFAULTS["tol.support_cutoff"]
    majorize: float = DEFAULTS["tol.majorize"]
    kms: float = DEFAULTS["tol.kms"]
    bound: float = DEFAULTS["tol.bound"]
    conv: float = DEFAULTS["tol.conv"]
    axiom: float = DEFAULTS["tol.axiom"]
    corr: float = DEFAULTS["tol.corr"]
    haagerup: float = DEFAULTS["tol.haagerup"]
    spectral: float = DEFAULTS["tol.spectral"]
    residue: float = DEFAULTS["tol.residue"]
    assoc: float = DEFAULTS["tol.assoc"]
    exact: float = DEFAULTS["tol.exact"]

    @classmethod
    def resolve(cls, config: Optional[Config] = None, overrides: Optional[Mapping[str, float]] = None,
                scale: float = 1.0) -> "Tolerances":
        """defaults <- user config <- experiment overrides, then times ``scale``.

        ``support_cutoff`` selects eigenvalues rather than bounding an error, so
        it is not scaled.
        """
        if not scale > 0:
            raise ValueError(f"Tolerance scale must be positive, got {scale}")
        overrides = dict(overrides or {})
        unknown = set(overrides) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"Unknown tolerance(s): {', '.join(sorted(unknown))}")
        values = {}
        for f in fields(cls):
            key = f"tol.{f.name}"
            value = float(overrides.get(f.name, config.get(key) if config else DEFAULTS[key]))
            values[f.name] = value if f.name == "support_cutoff" else value * scale
        return cls(**values)

    @property
    def functional_options(self) -> dict:
        """Keyword arguments that carry the spectral tolerances into a Functional."""
        return {"support_cutoff": self.support_cutoff, "hermitian_tol": self.hermitian}

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
