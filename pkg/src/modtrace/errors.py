"""
Exception hierarchy for modtrace.

Every error derives from ModtraceError and from the builtin that matches its
nature, so callers can catch either ``ValueError`` or the specific class.
"""

from __future__ import annotations

from typing import Optional


class ModtraceError(Exception):
    """Base class for all modtrace errors."""


# ─── Matrix substrate / algebra ───────────────────────────────

class NotHermitian(ModtraceError, ValueError):
    """A block flagged Hermitian violates hermitian_tol."""


class NotPSD(ModtraceError, ValueError):
    """A density has an eigenvalue below -support_cutoff * max eigenvalue."""


class NumericalFailure(ModtraceError, ArithmeticError):
    """The eigensolver (or another LAPACK routine) did not converge."""


class AlgebraMismatch(ModtraceError, ValueError):
    """Operands live in different algebras or have the wrong block shape."""


class NotFaithful(ModtraceError, ValueError):
    """A faithful functional was required."""


# ─── Standard form ────────────────────────────────────────────

class NotCompressed(ModtraceError, ValueError):
    """a != [phi] a [psi] beyond power_tol."""


class OutOfStrip(ModtraceError, ValueError):
    """A complex argument lies outside the admissible strip."""


# ─── Sections and interpolators ───────────────────────────────

class GridMismatch(ModtraceError, ValueError):
    """Grid-sampled operands use different time or lambda grids."""


class ReferenceMismatch(ModtraceError, ValueError):
    """Sections are trivialised by different reference states."""


class PoleHit(ModtraceError, ArithmeticError):
    """An interpolator was evaluated on one of its poles."""


class PoleOnBoundary(ModtraceError, ArithmeticError):
    """A pole lies within pole_margin of the strip boundary."""


class NotSquareIntegrable(ModtraceError, ValueError):
    """The level -1/2 boundary data is not square integrable."""


class UnsupportedForm(ModtraceError, ValueError):
    """The requested representation cannot express this object."""


# ─── Crossed product / correspondence ─────────────────────────

class NotInN(ModtraceError, ValueError):
    """The interpolator is not a genuine member of the Hilbert algebra."""


class NotIntegrable(ModtraceError, ArithmeticError):
    """A lambda-function fails its declared integrability class."""


class DivergentTrace(ModtraceError, ArithmeticError):
    """The trace is infinite (Haagerup formula with Re mu <= -1)."""


# ─── Harness ──────────────────────────────────────────────────

class ConfigInvalid(ModtraceError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)


class IoFailure(ModtraceError, OSError):
    """A report or series file could not be written or read."""


class SkipExperiment(ModtraceError):
    """Raised by a suite to report itself skipped, with the reason as message."""
