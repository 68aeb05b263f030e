"""
Identity suites.

A suite is a function ``suite(ctx, **params) -> list[ReportRow]`` registered
with ``@registry.register``. Its parameters and their defaults are read from
the signature; the decorator only adds a one-line description per parameter.
Suite modules are imported lazily by ``ensure_loaded``.
"""
from __future__ import annotations

import importlib
import inspect
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from rich.table import Table

logger = logging.getLogger("modtrace.suites")

SLOW_CATEGORIES = frozenset({"convergence"})

_SUITE_MODULES = ("substrate", "modular", "boundary", "hilbert", "trace", "correspondence")


@dataclass
class Suite:
    """A registered identity suite."""
    name: str
    description: str
    category: str
    function: Callable
    parameters: dict = field(default_factory=dict)   # name -> help text

    @property
    def slow(self) -> bool:
        return self.category in SLOW_CATEGORIES

    def defaults(self) -> dict[str, Any]:
        """Signature defaults of the declared parameters."""
        signature = inspect.signature(self.function)
        return {name: p.default for name, p in signature.parameters.items()
                if name in self.parameters and p.default is not inspect.Parameter.empty}

    def run(self, ctx, **params):
        unknown = sorted(set(params) - set(self.parameters))
        if unknown:
            raise ValueError(f"Unknown parameter(s) for {self.name}: {', '.join(unknown)}")
        return self.function(ctx, **params)


class SuiteRegistry:
    """Suites by name."""

    def __init__(self):
        self._suites: dict[str, Suite] = {}

    def register(self, name: str, description: str, category: str, parameters: Optional[dict] = None):
        def decorator(func):
            if name in self._suites:
                raise ValueError(f"Suite {name!r} is registered twice")
            declared = dict(parameters or {})
            accepted = set(inspect.signature(func).parameters) - {"ctx"}
            missing = set(declared) - accepted
            if missing:
                raise TypeError(f"{func.__name__} does not accept {', '.join(sorted(missing))}")
            self._suites[name] = Suite(name, description, category, func, declared)
            return func
        return decorator

    def get_suite(self, name: str) -> Optional[Suite]:
        return self._suites.get(name)

    def list_suites(self, category: Optional[str] = None) -> list[Suite]:
        """Suites sorted by name, optionally one category only."""
        return sorted((s for s in self._suites.values() if category is None or s.category == category),
                      key=lambda s: s.name)

    def categories(self) -> list[str]:
        return sorted({s.category for s in self._suites.values()})

    def list_suites_table(self) -> Table:
        table = Table(title="modtrace suites")
        table.add_column("Suite", style="cyan")
        table.add_column("Category")
        table.add_column("Description")
        table.add_column("Parameters (default)", style="dim")

        for suite in self.list_suites():
            defaults = suite.defaults()
            params = ", ".join(f"{p}={_short(defaults[p])}" if p in defaults else p
                               for p in suite.parameters) or "-"
            category = f"[yellow]{suite.category}[/yellow]" if suite.slow else suite.category
            table.add_row(suite.name, category, suite.description, params)
        return table


def _short(value) -> str:
    text = repr(value)
    return text if len(text) <= 24 else text[:21] + "..."


registry = SuiteRegistry()

_load_errors: Optional[dict[str, str]] = None


def ensure_loaded() -> dict[str, str]:
    """Import every suite module once; returns the modules that failed to import."""
    global _load_errors
    if _load_errors is None:
        _load_errors = {}
        for module_name in _SUITE_MODULES:
            try:
                importlib.import_module(f"{__name__}.{module_name}")
            except Exception as exc:
                _load_errors[module_name] = f"{type(exc).__name__}: {exc}"
                logger.warning("suite module %s failed to load: %s", module_name, exc)
    return dict(_load_errors)


def suite_load_errors() -> dict[str, str]:
    return dict(_load_errors or {})


def as_list(value) -> list:
    """Params accept a scalar or a list."""
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def as_complex(value) -> complex:
    """A number or an [re, im] pair."""
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)
