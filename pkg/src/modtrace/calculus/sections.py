"""
Section calculus on a uniform time grid.

A section t -> x(t) in M(it) is stored in the trivialisation x(t) = a(t) rho_w^{it}
by a faithful reference state w. Twisted convolution, the section star and the
scaling automorphism theta_s act on the stored a(t). Hilbert-space vectors of
the crossed product (level -1/2 data) are stored here as well, since they share
the grid and its quadrature.

Quadrature is the trapezoid rule. Integrands with Gaussian decay need nothing
else; algebraically decaying integrands (rational envelopes) get an analytic
tail beyond +-T fitted to A/u^2 + B/u^3 + C/u^4 on each side.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Literal, Optional

import numpy as np
import scipy.integrate
import scipy.signal

from modtrace.calculus.algebra import AlgebraElement, FiniteAlgebra, Functional
from modtrace.calculus.matrix import POWER_TOL, op_norms
from modtrace.errors import GridMismatch, NotFaithful, ReferenceMismatch

logger = logging.getLogger("modtrace.calculus.sections")

Decay = Literal["gaussian", "algebraic"]
CONV_TOL = 1e-9
_TAIL_FRACTIONS = (1.0, 0.75, 0.5)


@dataclass(frozen=True)
class TimeGrid:
    """Symmetric uniform grid t_k = k dt, |k| <= floor(T / dt)."""

    T: float = 40.0
    dt: float = 0.01

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0):
            raise ValueError(f"Grid needs T > 0 and dt > 0, got T={self.T}, dt={self.dt}")
        if self.T / self.dt < 1:
            raise ValueError(f"Grid step {self.dt} exceeds half width {self.T}")

    @cached_property
    def half(self) -> int:
        return int(np.floor(self.T / self.dt + 1e-9))

    @property
    def size(self) -> int:
        return 2 * self.half + 1

    @property
    def edge(self) -> float:
        return self.half * self.dt

    @cached_property
    def points(self) -> np.ndarray:
        return self.dt * np.arange(-self.half, self.half + 1)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.size, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w

    def index_of(self, t: float) -> int:
        """Grid index of ``t``; t must be a grid point."""
        k = int(round(t / self.dt))
        if abs(t - k * self.dt) > 1e-9 * max(1.0, abs(t)) or abs(k) > self.half:
            raise GridMismatch(f"t = {t} is not a point of the grid (T={self.T}, dt={self.dt})")
        return k + self.half

    def integrate(self, values, decay: Decay = "gaussian"):
        """Trapezoid rule along axis 0, plus the fitted tail for algebraic decay."""
        values = np.asarray(values)
        total = scipy.integrate.trapezoid(values, dx=self.dt, axis=0)
        if decay == "algebraic":
            total = total + self._tail(values)
        return total

    def _tail(self, values: np.ndarray):
        n = self.half
        if n < 8:
            return np.zeros(values.shape[1:], dtype=values.dtype)
        steps = [int(round(n * f)) for f in _TAIL_FRACTIONS]
        u = np.array([k * self.dt for k in steps])
        design = np.stack([u ** -2, u ** -3, u ** -4], axis=1)
        edge = self.edge
        primitive = np.array([1 / edge, 1 / (2 * edge ** 2), 1 / (3 * edge ** 3)])
        tail = 0
        for side in (1, -1):
            samples = values[[n + side * k for k in steps]].reshape(3, -1)
            coef = np.linalg.solve(design, samples)
            tail = tail + (primitive @ coef).reshape(values.shape[1:])
        return tail

    def to_dict(self) -> dict:
        return {"T": self.T, "dt": self.dt}


@lru_cache(maxsize=32)
def reference_phases(grid: TimeGrid, reference: Functional) -> np.ndarray:
    """rho_w^{it} for every grid point, shape (n, d, d); read-only after creation."""
    phases = reference.powers(1j * grid.points)
    phases.setflags(write=False)
    return phases


def matrix_convolve(a: np.ndarray, b: np.ndarray, weights: np.ndarray,
                    method: Literal["fft", "direct"] = "fft") -> np.ndarray:
    """c[k] = sum_j w_j a[j] @ b[k - j + N] on a symmetric grid of 2N+1 points.

    Scalars (shape (n,)) are treated as 1x1 matrices.
    """
    scalar = a.ndim == 1
    if scalar:
        a, b = a[:, None, None], b[:, None, None]
    n = a.shape[0]
    half = n // 2
    weighted = a * weights[:, None, None]
    if method == "fft":
        full = scipy.signal.fftconvolve(weighted[:, :, :, None], b[:, None, :, :], axes=0)
        out = full.sum(axis=2)[half:half + n]
    elif method == "direct":
        out = np.zeros((n, a.shape[1], b.shape[2]), dtype=complex)
        for j in range(n):
            lo, hi = max(0, j - half), min(n, n + j - half)
            out[lo:hi] += weighted[j] @ b[lo - j + half:hi - j + half]
    else:
        raise ValueError(f"Unknown convolution method {method!r}")
    return out[:, 0, 0] if scalar else out


@dataclass(frozen=True)
class DecayCertificate:
    """||a(t)||_op <= C exp(-delta t^2)."""

    C: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"Decay rate must be positive, got {self.delta}")

    def bound(self, t: np.ndarray) -> np.ndarray:
        return self.C * np.exp(-self.delta * np.asarray(t) ** 2)

    def product(self, other: "DecayCertificate") -> "DecayCertificate":
        """Certificate of a convolution: Gaussians convolve to a Gaussian."""
        rate = self.delta + other.delta
        return DecayCertificate(self.C * other.C * np.sqrt(np.pi / rate),
                                self.delta * other.delta / rate)

    @classmethod
    def fitted(cls, grid: TimeGrid, values: np.ndarray, delta: float) -> "DecayCertificate":
        """Smallest C for the given rate that the samples satisfy."""
        sizes = op_norms(values)
        positive = sizes > 0
        if not positive.any():
            return cls(0.0, delta)
        log_c = np.max(np.log(sizes[positive]) + delta * grid.points[positive] ** 2)
        return cls(float(np.exp(log_c)) * (1 + 1e-12), delta)


@dataclass(frozen=True, eq=False)
class GridSection:
    """Trivialised section a(t), x(t) = a(t) rho_w^{it}, with a decay certificate."""

    grid: TimeGrid
    reference: Functional
    values: np.ndarray
    decay: DecayCertificate

    def __post_init__(self):
        if not self.reference.is_faithful:
            raise NotFaithful("Sections need a faithful reference state")
        d = self.reference.algebra.dim
        if self.values.shape != (self.grid.size, d, d):
            raise ValueError(f"Section values have shape {self.values.shape}, "
                             f"expected {(self.grid.size, d, d)}")
        sizes = op_norms(self.values)
        limit = self.decay.bound(self.grid.points) * (1 + 1e-6) + 1e-12 * max(self.decay.C, 1.0)
        excess = sizes - limit
        if np.any(excess > 0):
            worst = int(np.argmax(excess))
            raise ValueError(
                f"Decay certificate violated at t={self.grid.points[worst]:.3f}: "
                f"{sizes[worst]:.3e} > {limit[worst]:.3e}"
            )

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.reference.algebra

    # ─── constructors ────────────────────────────────────────

    @classmethod
    def gaussian(cls, grid: TimeGrid, reference: Functional, alpha: float, beta: complex = 0.0,
                 left=None, state: Optional[Functional] = None, right=None) -> "GridSection":
        """x(t) = e^{-alpha t^2 + beta t} left state^{it} right."""
        d = reference.algebra.dim
        x = np.eye(d) if left is None else _m(left)
        y = np.eye(d) if right is None else _m(right)
        state = state or reference
        t = grid.points
        envelope = np.exp(-alpha * t ** 2 + beta * t)
        x_t = envelope[:, None, None] * (x @ state.powers(1j * t) @ y)
        values = x_t @ np.conj(np.swapaxes(reference_phases(grid, reference), 1, 2))
        C = float(np.linalg.norm(x, 2) * np.linalg.norm(y, 2) * np.exp(np.real(beta) ** 2 / (2 * alpha)))
        return cls(grid, reference, values, DecayCertificate(C, alpha / 2))

    @classmethod
    def scalar(cls, grid: TimeGrid, reference: Functional,
               fn: Callable[[np.ndarray], np.ndarray], delta: float) -> "GridSection":
        """a(t) = F(t) 1 with a fitted certificate at rate ``delta``."""
        d = reference.algebra.dim
        values = np.asarray(fn(grid.points), dtype=complex)[:, None, None] * np.eye(d)
        return cls(grid, reference, values, DecayCertificate.fitted(grid, values, delta))

    # ─── norms ───────────────────────────────────────────────

    def sup_norm(self) -> float:
        return float(op_norms(self.values).max())

    def l1_norm(self) -> float:
        return float(self.grid.integrate(op_norms(self.values)))

    def distance(self, other: "GridSection") -> float:
        """L^1 distance of the trivialised values."""
        return float(self.grid.integrate(op_norms(self.values - other.values)))

    def is_central(self, tol: float = POWER_TOL) -> bool:
        rho = self.reference.density
        commutators = self.values @ rho - rho @ self.values
        return float(np.max(np.abs(commutators))) <= tol * max(1.0, float(np.max(np.abs(self.values))))

    def to_dict(self) -> dict:
        from modtrace.calculus.algebra import _encode

        return {
            "grid": self.grid.to_dict(),
            "reference": self.reference.to_dict(),
            "decay": {"C": self.decay.C, "delta": self.decay.delta},
            "values": [_encode(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSection":
        from modtrace.calculus.algebra import _decode

        grid = TimeGrid(**data["grid"])
        reference = Functional.from_dict(data["reference"])
        values = np.array([_decode(v) for v in data["values"]])
        return cls(grid, reference, values, DecayCertificate(**data["decay"]))


def _m(x) -> np.ndarray:
    return x.matrix if isinstance(x, AlgebraElement) else np.asarray(x, dtype=complex)


def _check_compatible(f: GridSection, g: GridSection) -> None:
    if f.grid != g.grid:
        raise GridMismatch(f"Grids differ: {f.grid} vs {g.grid}")
    if not f.reference.same_as(g.reference):
        raise ReferenceMismatch("Sections are trivialised by different reference states")


def convolve(f: GridSection, g: GridSection,
             method: Literal["auto", "fft", "direct"] = "auto") -> GridSection:
    """(fg)(t) = sum_s a(s) sigma_s(b(t - s)) dt (trapezoid weights).

    ``fft`` convolves the untrivialised matrices x(s) = a(s) rho^{is} with
    scipy.signal.fftconvolve and re-trivialises; ``direct`` sums over s with
    the cached powers rho^{is}. ``auto`` skips the twist when both sections are
    central.
    """
    _check_compatible(f, g)
    grid = f.grid
    weights = grid.weights
    if method == "auto" and f.is_central() and g.is_central():
        values = matrix_convolve(f.values, g.values, weights, "fft")
    elif method in ("auto", "fft"):
        phases = reference_phases(grid, f.reference)
        product = matrix_convolve(f.values @ phases, g.values @ phases, weights, "fft")
        values = product @ np.conj(np.swapaxes(phases, 1, 2))
    elif method == "direct":
        values = _twisted_direct(f, g)
    else:
        raise ValueError(f"Unknown convolution method {method!r}")
    return GridSection(grid, f.reference, values, f.decay.product(g.decay))


def _twisted_direct(f: GridSection, g: GridSection) -> np.ndarray:
    grid = f.grid
    phases = reference_phases(grid, f.reference)
    n, half = grid.size, grid.half
    out = np.zeros_like(f.values)
    for j in range(n):
        lo, hi = max(0, j - half), min(n, n + j - half)
        u = phases[j]
        twisted = u @ g.values[lo - j + half:hi - j + half] @ u.conj().T
        out[lo:hi] += grid.weights[j] * (f.values[j] @ twisted)
    return out


def star(f: GridSection) -> GridSection:
    """a*(t) = sigma_t(a(-t)^dagger)."""
    phases = reference_phases(f.grid, f.reference)
    flipped = np.conj(np.swapaxes(f.values[::-1], 1, 2))
    values = phases @ flipped @ np.conj(np.swapaxes(phases, 1, 2))
    return GridSection(f.grid, f.reference, values, f.decay)


def scale_theta(f: GridSection, s: float) -> GridSection:
    """(theta_s f)(t) = e^{-ist} f(t)."""
    phase = np.exp(-1j * s * f.grid.points)
    return GridSection(f.grid, f.reference, phase[:, None, None] * f.values, f.decay)


@dataclass(frozen=True, eq=False)
class HilbertVector:
    """Element of the crossed-product Hilbert space: xi(t) in L^2(M) per grid point."""

    grid: TimeGrid
    algebra: FiniteAlgebra
    values: np.ndarray
    decay: Decay = "gaussian"

    def __post_init__(self):
        d = self.algebra.dim
        if self.values.shape != (self.grid.size, d, d):
            raise ValueError(f"Vector values have shape {self.values.shape}, "
                             f"expected {(self.grid.size, d, d)}")

    def pointwise_inner(self, other: "HilbertVector") -> np.ndarray:
        if other.grid != self.grid:
            raise GridMismatch(f"Grids differ: {self.grid} vs {other.grid}")
        return np.einsum("kij,kij->k", np.conj(self.values), other.values)

    def inner(self, other: "HilbertVector") -> complex:
        decay = "algebraic" if self.decay == other.decay == "algebraic" else "gaussian"
        return complex(self.grid.integrate(self.pointwise_inner(other), decay))

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def pointwise_norms(self) -> np.ndarray:
        return np.einsum("kij,kij->k", np.conj(self.values), self.values).real

    def gram(self) -> np.ndarray:
        """sum_t xi(t) xi(t)^dagger dt, the operator whose trace is ||xi||^2."""
        outer = self.values @ np.conj(np.swapaxes(self.values, 1, 2))
        return self.grid.integrate(outer, self.decay)

    def star(self) -> "HilbertVector":
        """xi*(t) = xi(-t)^dagger."""
        return self._with(np.conj(np.swapaxes(self.values[::-1], 1, 2)))

    def left_multiply(self, a) -> "HilbertVector":
        return self._with(_m(a) @ self.values)

    def phase(self, s: float) -> "HilbertVector":
        """Dual action W_s xi(t) = e^{-ist} xi(t)."""
        return self._with(np.exp(-1j * s * self.grid.points)[:, None, None] * self.values)

    def translate(self, u: float, unitary=None) -> "HilbertVector":
        """(V xi)(t) = unitary xi(t - u); samples shifted off the grid are dropped."""
        shift = self.grid.index_of(u) - self.grid.half
        shifted = np.zeros_like(self.values)
        if shift >= 0:
            shifted[shift:] = self.values[:self.grid.size - shift]
        else:
            shifted[:shift] = self.values[-shift:]
        return self._with(shifted if unitary is None else _m(unitary) @ shifted)

    def __add__(self, other: "HilbertVector") -> "HilbertVector":
        return self._with(self.values + other.values)

    def __sub__(self, other: "HilbertVector") -> "HilbertVector":
        return self._with(self.values - other.values)

    def __mul__(self, scalar: complex) -> "HilbertVector":
        return self._with(complex(scalar) * self.values)

    __rmul__ = __mul__

    def _with(self, values: np.ndarray) -> "HilbertVector":
        return HilbertVector(self.grid, self.algebra, values, self.decay)
