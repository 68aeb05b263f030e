"""
Closed-form interpolators f(z) = sum_k env_k(z) x_k rho_k^{iz} y_k on the strip.

Envelopes come from a closed library: ``gaussian_poly`` (e^{-alpha z^2 + beta z}
times a polynomial) and ``rational_pole`` (c / (mu + iz), simple pole at z = i mu).
Both are entire off their poles, so shifting, starring and dual phases stay
inside the library and every evaluation is exact spectral calculus.

Boundary data:
  * level -1/2: the boundary vector t -> f(t - i/2), a HilbertVector;
  * level 0:    the boundary operator int f(t) dt, as a function m(lambda) of
                the log-generator (phi^{it} <-> e^{-it lambda});
  * poles:      the residue operator 2 pi i sum Res f, by circle quadrature.

lambda-functions live on a symmetric LambdaGrid and keep their one-sided
limits at lambda = 0, where the cutoff functions jump.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import scipy.integrate
from numpy.polynomial import Polynomial

from modtrace.calculus.algebra import AlgebraElement, FiniteAlgebra, Functional, _decode, _encode
from modtrace.calculus.matrix import POWER_TOL
from modtrace.calculus.sections import (
    DecayCertificate,
    GridSection,
    HilbertVector,
    TimeGrid,
    convolve,
    reference_phases,
)
from modtrace.errors import (
    AlgebraMismatch,
    ConfigInvalid,
    IoFailure,
    NotIntegrable,
    NotSquareIntegrable,
    OutOfStrip,
    PoleHit,
    PoleOnBoundary,
    UnsupportedForm,
)

logger = logging.getLogger("modtrace.calculus.interpolators")

INTEGRABLE_TOL = 1e-6
_FOURIER_CHUNK = 256


@dataclass(frozen=True)
class ContourRule:
    """Circle quadrature around poles and the exclusion band near the strip edges."""

    points: int = 256
    radius: float = 0.05
    pole_margin: float = 1e-3


# ─── envelopes ───────────────────────────────────────────────


@dataclass(frozen=True)
class GaussianPoly:
    """e^{-alpha z^2 + beta z} p(z), coefficients of p ascending."""

    alpha: complex
    beta: complex = 0.0
    coeffs: tuple = (1.0,)

    kind = "gaussian_poly"

    def __post_init__(self):
        if not complex(self.alpha).real > 0:
            raise ValueError(f"gaussian_poly needs Re alpha > 0, got {self.alpha}")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    @property
    def poles(self) -> tuple:
        return ()

    @property
    def decay(self) -> str:
        return "gaussian"

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-self.alpha * z ** 2 + self.beta * z) * Polynomial(self.coeffs)(z)

    def shift(self, w: complex) -> "GaussianPoly":
        w = complex(w)
        const = np.exp(-self.alpha * w ** 2 + self.beta * w)
        moved = Polynomial(self.coeffs)(Polynomial([w, 1.0])) * const
        return GaussianPoly(self.alpha, self.beta - 2 * self.alpha * w, tuple(moved.coef))

    def star(self) -> "GaussianPoly":
        coeffs = tuple(np.conj(c) * (-1) ** k for k, c in enumerate(self.coeffs))
        return GaussianPoly(np.conj(self.alpha), -np.conj(self.beta), coeffs)

    def dual_phase(self, s: float) -> "GaussianPoly":
        return GaussianPoly(self.alpha, self.beta - 1j * s, self.coeffs)

    def scaled(self, c: complex) -> "GaussianPoly":
        return GaussianPoly(self.alpha, self.beta, tuple(complex(c) * k for k in self.coeffs))

    def fourier(self, grid: TimeGrid, lambdas: np.ndarray) -> np.ndarray:
        """F^(lambda) = int F(t) e^{-it lambda} dt by direct quadrature, chunked over lambda."""
        weighted = self(grid.points) * grid.weights
        out = np.empty(lambdas.shape, dtype=complex)
        for start in range(0, lambdas.size, _FOURIER_CHUNK):
            chunk = lambdas[start:start + _FOURIER_CHUNK]
            out[start:start + _FOURIER_CHUNK] = np.exp(-1j * np.outer(chunk, grid.points)) @ weighted
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": _cplx(self.alpha), "beta": _cplx(self.beta),
                "coeffs": [_cplx(c) for c in self.coeffs]}


@dataclass(frozen=True)
class RationalPole:
    """c / (mu + iz), simple pole at z = i mu."""

    mu: complex
    coeff: complex = 1.0

    kind = "rational_pole"

    @property
    def pole(self) -> complex:
        return 1j * complex(self.mu)

    @property
    def poles(self) -> tuple:
        return (self.pole,)

    @property
    def decay(self) -> str:
        return "algebraic"

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.coeff / (self.mu + 1j * z)

    def residue(self) -> complex:
        return complex(self.coeff) / 1j

    def shift(self, w: complex) -> "RationalPole":
        return RationalPole(complex(self.mu) + 1j * complex(w), self.coeff)

    def star(self) -> "RationalPole":
        return RationalPole(np.conj(self.mu), np.conj(self.coeff))

    def dual_phase(self, s: float) -> "RationalPole":
        raise UnsupportedForm("rational_pole envelopes do not absorb the dual phase e^{-isz}")

    def scaled(self, c: complex) -> "RationalPole":
        return RationalPole(self.mu, complex(c) * self.coeff)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mu": _cplx(self.mu), "coeff": _cplx(self.coeff)}


Envelope = Union[GaussianPoly, RationalPole]


def gaussian_fourier(alpha: complex, beta: complex, lambdas) -> np.ndarray:
    """Closed form of int e^{-alpha t^2 + beta t} e^{-it lambda} dt."""
    lambdas = np.asarray(lambdas, dtype=float)
    return np.sqrt(np.pi / alpha) * np.exp((beta - 1j * lambdas) ** 2 / (4 * alpha))


# ─── specs ───────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Term:
    envelope: Envelope
    left: np.ndarray
    state: Functional
    right: np.ndarray

    def __post_init__(self):
        d = self.state.algebra.dim
        for name in ("left", "right"):
            value = getattr(self, name)
            matrix = value.matrix if isinstance(value, AlgebraElement) else np.asarray(value, dtype=complex)
            if matrix.shape != (d, d):
                raise AlgebraMismatch(f"Term {name} factor has shape {matrix.shape}, expected {(d, d)}")
            object.__setattr__(self, name, matrix)

    def values(self, zs: np.ndarray) -> np.ndarray:
        env = self.envelope(zs)
        return env[..., None, None] * (self.left @ self.state.powers(1j * zs) @ self.right)

    def with_(self, **changes) -> "Term":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class InterpolatorSpec:
    terms: tuple
    strip: tuple = (0.0, 0.5)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("An interpolator needs at least one term")
        algebras = {t.state.algebra for t in terms}
        if len(algebras) > 1:
            raise AlgebraMismatch("Interpolator terms live in different algebras")
        lo, hi = (float(v) for v in self.strip)
        if lo > hi:
            raise ValueError(f"Empty strip {self.strip}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "strip", (lo, hi))

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.terms[0].state.algebra

    @property
    def poles(self) -> list[tuple[complex, int]]:
        return [(p, 1) for t in self.terms for p in t.envelope.poles]

    @property
    def decay(self) -> str:
        return "algebraic" if any(t.envelope.decay == "algebraic" for t in self.terms) else "gaussian"

    @property
    def is_gaussian(self) -> bool:
        return self.decay == "gaussian"

    def growth(self) -> list[tuple[str, float]]:
        """Per-term growth class: Gaussian rate Re alpha, or algebraic order 1."""
        return [("gaussian", float(np.real(t.envelope.alpha))) if t.envelope.decay == "gaussian"
                else ("algebraic", 1.0) for t in self.terms]

    def values(self, zs, pole_margin: float = ContourRule.pole_margin) -> np.ndarray:
        """f(z) for every z in ``zs``; shape zs.shape + (d, d)."""
        zs = np.asarray(zs, dtype=complex)
        for pole, _ in self.poles:
            if zs.size and np.min(np.abs(zs - pole)) < pole_margin:
                raise PoleHit(f"Evaluation within {pole_margin:g} of the pole at {pole:.6g}")
        return sum(t.values(zs) for t in self.terms)

    def shift(self, w: complex) -> "InterpolatorSpec":
        """z -> f(z + w), exact."""
        terms = tuple(t.with_(envelope=t.envelope.shift(w),
                              right=t.state.power(1j * complex(w)) @ t.right) for t in self.terms)
        lo, hi = self.strip
        return InterpolatorSpec(terms, (lo + complex(w).imag, hi + complex(w).imag))

    def star(self) -> "InterpolatorSpec":
        """f*(z) = f(-conj z)^dagger."""
        terms = tuple(t.with_(envelope=t.envelope.star(), left=t.right.conj().T,
                              right=t.left.conj().T) for t in self.terms)
        return InterpolatorSpec(terms, self.strip)

    def dual_phase(self, s: float) -> "InterpolatorSpec":
        """z -> e^{-isz} f(z)."""
        return InterpolatorSpec(tuple(t.with_(envelope=t.envelope.dual_phase(s)) for t in self.terms),
                                self.strip)

    def left_multiply(self, a) -> "InterpolatorSpec":
        a = a.matrix if isinstance(a, AlgebraElement) else np.asarray(a, dtype=complex)
        return InterpolatorSpec(tuple(t.with_(left=a @ t.left) for t in self.terms), self.strip)

    def scaled(self, c: complex) -> "InterpolatorSpec":
        return InterpolatorSpec(tuple(t.with_(envelope=t.envelope.scaled(c)) for t in self.terms),
                                self.strip)

    def __add__(self, other: "InterpolatorSpec") -> "InterpolatorSpec":
        lo = max(self.strip[0], other.strip[0])
        hi = min(self.strip[1], other.strip[1])
        return InterpolatorSpec(self.terms + other.terms, (lo, max(lo, hi)))

    # ─── JSON ────────────────────────────────────────────────

    def to_dict(self) -> dict:
        return {
            "strip": list(self.strip),
            "terms": [
                {"envelope": t.envelope.to_dict(), "left": _encode(t.left),
                 "state": t.state.to_dict(), "right": _encode(t.right)}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, **options) -> "InterpolatorSpec":
        """``options`` are the Functional tolerances given to every term state."""
        try:
            terms = [_term_from_dict(entry, i, options) for i, entry in enumerate(data["terms"])]
        except KeyError as exc:
            raise ConfigInvalid(f"Missing key {exc}", field="terms") from exc
        return cls(tuple(terms), tuple(data.get("strip", (0.0, 0.5))))


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


def _term_from_dict(entry: dict, index: int, options: dict) -> Term:
    where = f"terms[{index}]"
    state_data = entry["state"]
    if "diag" in state_data:
        state = Functional.diagonal(state_data["diag"], **options)
    else:
        state = Functional.from_dict(state_data, **options)
    d = state.algebra.dim
    env = entry["envelope"]
    kind = env.get("kind")
    if kind == "gaussian_poly":
        envelope = GaussianPoly(_parse_complex(env["alpha"]), _parse_complex(env.get("beta", 0.0)),
                                tuple(_parse_complex(c) for c in env.get("coeffs", [1.0])))
    elif kind == "rational_pole":
        envelope = RationalPole(_parse_complex(env["mu"]), _parse_complex(env.get("coeff", 1.0)))
    else:
        raise ConfigInvalid(f"Unknown envelope kind {kind!r}", field=f"{where}.envelope.kind")
    left = _decode(entry["left"]) if "left" in entry else np.eye(d, dtype=complex)
    right = _decode(entry["right"]) if "right" in entry else np.eye(d, dtype=complex)
    return Term(envelope, left, state, right)


def load_spec(path: Union[str, Path], **options) -> InterpolatorSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"Cannot read interpolator file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return InterpolatorSpec.from_dict(data, **options)


def simple_spec(envelope: Envelope, state: Functional, left=None, right=None,
                strip: tuple = (0.0, 0.5)) -> InterpolatorSpec:
    d = state.algebra.dim
    eye = np.eye(d, dtype=complex)
    return InterpolatorSpec((Term(envelope, eye if left is None else left, state,
                                  eye if right is None else right),), strip)


# ─── evaluation ──────────────────────────────────────────────


def evaluate_interpolator(spec: InterpolatorSpec, z: complex,
                          rule: ContourRule = ContourRule()) -> AlgebraElement:
    r = -complex(z).imag
    if r < -1e-12 or r > 1 + 1e-12:
        raise OutOfStrip(f"Im z = {complex(z).imag:g} is outside [-1, 0]")
    return AlgebraElement(spec.algebra, spec.values(complex(z), rule.pole_margin))


def compatibility_residual(spec: InterpolatorSpec, z: complex, omega: Functional) -> float:
    """|| sigma_z^w(rho_w^{-iz} f(z)) - f(z) rho_w^{-iz} || relative to ||f(z) rho_w^{-iz}||."""
    value = spec.values(complex(z))
    left_form = value @ omega.power(-1j * z)
    right_form = omega.power(-1j * z) @ value
    twisted = omega.power(1j * z) @ right_form @ omega.power(-1j * z)
    scale = max(float(np.linalg.norm(left_form)), 1e-300)
    return float(np.linalg.norm(twisted - left_form)) / scale


def convolve_at(f: InterpolatorSpec, g: InterpolatorSpec, z: complex, grid: TimeGrid) -> np.ndarray:
    """sum_s f(s) g(z - s) w_s over the real grid (matrix model of the product)."""
    s = grid.points
    return np.einsum("k,kij,kjl->il", grid.weights, f.values(s), g.values(complex(z) - s))


def section_of(spec: InterpolatorSpec, grid: TimeGrid, reference: Functional) -> GridSection:
    """Level-0 restriction t -> f(t) as a trivialised GridSection."""
    if not spec.is_gaussian:
        raise UnsupportedForm("Only gaussian_poly interpolators restrict to decaying sections")
    values = spec.values(grid.points) @ np.conj(np.swapaxes(reference_phases(grid, reference), 1, 2))
    delta = min(float(np.real(t.envelope.alpha)) for t in spec.terms) / 2
    return GridSection(grid, reference, values, DecayCertificate.fitted(grid, values, delta))


# ─── boundary vector ─────────────────────────────────────────


def boundary_vector(spec: InterpolatorSpec, grid: TimeGrid,
                    rule: ContourRule = ContourRule()) -> HilbertVector:
    """t -> f(t - i/2) on the grid."""
    for term in spec.terms:
        if isinstance(term.envelope, RationalPole) and abs(complex(term.envelope.mu).real + 0.5) < rule.pole_margin:
            raise NotSquareIntegrable(
                f"Pole at Re mu = {complex(term.envelope.mu).real:g} lies on the critical line Re mu = -1/2"
            )
    values = spec.values(grid.points - 0.5j, rule.pole_margin)
    return HilbertVector(grid, spec.algebra, values, spec.decay)


# ─── lambda model ────────────────────────────────────────────


@dataclass(frozen=True)
class LambdaGrid:
    L: float = 60.0
    dlambda: float = 0.01

    def __post_init__(self):
        if not (self.L > 0 and self.dlambda > 0) or self.L < self.dlambda:
            raise ValueError(f"Bad lambda grid L={self.L}, dlambda={self.dlambda}")

    @cached_property
    def half(self) -> int:
        return int(np.floor(self.L / self.dlambda + 1e-9))

    @cached_property
    def points(self) -> np.ndarray:
        return self.dlambda * np.arange(-self.half, self.half + 1)

    def to_dict(self) -> dict:
        return {"L": self.L, "dlambda": self.dlambda}


@dataclass(frozen=True, eq=False)
class LambdaFunction:
    """Samples of m(lambda) plus its one-sided limits at lambda = 0."""

    grid: LambdaGrid
    values: np.ndarray
    left_limit: complex
    right_limit: complex

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.points.shape:
            raise ValueError(f"lambda samples have shape {values.shape}, expected {self.grid.points.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def continuous(cls, grid: LambdaGrid, values: np.ndarray) -> "LambdaFunction":
        mid = complex(np.asarray(values)[grid.half])
        return cls(grid, values, mid, mid)

    @classmethod
    def zero(cls, grid: LambdaGrid) -> "LambdaFunction":
        return cls(grid, np.zeros(grid.points.shape, dtype=complex), 0.0, 0.0)

    def _combine(self, other, op) -> "LambdaFunction":
        if isinstance(other, LambdaFunction):
            if other.grid != self.grid:
                raise ValueError("lambda functions live on different grids")
            return LambdaFunction(self.grid, op(self.values, other.values),
                                  op(self.left_limit, other.left_limit),
                                  op(self.right_limit, other.right_limit))
        c = complex(other)
        return LambdaFunction(self.grid, op(self.values, c), op(self.left_limit, c), op(self.right_limit, c))

    def __add__(self, other) -> "LambdaFunction":
        return self._combine(other, np.add)

    def __sub__(self, other) -> "LambdaFunction":
        return self._combine(other, np.subtract)

    def __mul__(self, other) -> "LambdaFunction":
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def abs2(self) -> "LambdaFunction":
        return LambdaFunction(self.grid, np.abs(self.values) ** 2,
                              abs(self.left_limit) ** 2, abs(self.right_limit) ** 2)

    def sup_distance(self, other: "LambdaFunction") -> float:
        diff = self - other
        return float(max(np.max(np.abs(diff.values)), abs(diff.left_limit), abs(diff.right_limit)))

    def weighted(self) -> np.ndarray:
        """m(lambda) e^lambda, the tau-density on the grid."""
        return self.values * np.exp(self.grid.points)

    def _integrate(self, fn: "LambdaFunction", tol: float) -> complex:
        n = self.grid.half
        dens = fn.values * np.exp(self.grid.points)
        scale = float(np.sum(np.abs(dens)) * self.grid.dlambda)
        edge = float(abs(dens[0]) + abs(dens[-1]))
        if scale > 0 and edge > tol * scale:
            raise NotIntegrable(
                f"m(lambda) e^lambda does not decay on [-{self.grid.L}, {self.grid.L}] "
                f"(edge {edge:.3e} vs mass {scale:.3e})"
            )
        negative = dens[:n + 1].copy()
        negative[-1] = fn.left_limit
        positive = dens[n:].copy()
        positive[0] = fn.right_limit
        dx = self.grid.dlambda
        return complex(scipy.integrate.simpson(negative, dx=dx) + scipy.integrate.simpson(positive, dx=dx))

    def tau_integral(self, tol: float = INTEGRABLE_TOL) -> complex:
        """int m(lambda) e^lambda d lambda (Simpson on each half line)."""
        return self._integrate(self, tol)

    def hs_norm2(self, tol: float = INTEGRABLE_TOL) -> float:
        """int |m(lambda)|^2 e^lambda d lambda."""
        return self._integrate(self.abs2(), tol).real


def cutoff_above(grid: LambdaGrid, mu: complex) -> LambdaFunction:
    """(1 v phi)^{-mu}: 1_{lambda <= 0} e^{lambda mu}."""
    lam = grid.points
    values = np.where(lam <= 0, np.exp(lam * complex(mu)), 0.0)
    return LambdaFunction(grid, values, 1.0, 0.0)


def cutoff_below(grid: LambdaGrid, mu: complex) -> LambdaFunction:
    """(1 ^ phi)^{-mu}: 1_{lambda >= 0} e^{lambda mu}."""
    lam = grid.points
    values = np.where(lam >= 0, np.exp(lam * complex(mu)), 0.0)
    return LambdaFunction(grid, values, 0.0, 1.0)


def power(grid: LambdaGrid, beta: complex) -> LambdaFunction:
    """phi^{-beta}: e^{beta lambda}."""
    return LambdaFunction(grid, np.exp(grid.points * complex(beta)), 1.0, 1.0)


def spectral_additivity_residual(grid: LambdaGrid, beta: complex) -> float:
    """phi^{-beta} against (1 v phi)^{-beta} + (1 ^ phi)^{-beta}, off lambda = 0."""
    total = cutoff_above(grid, beta) + cutoff_below(grid, beta)
    diff = power(grid, beta) - total
    off_zero = np.delete(np.abs(diff.values), grid.half)
    return float(max(off_zero.max(), abs(diff.left_limit), abs(diff.right_limit)))


# ─── boundary and residue operators ──────────────────────────


def circle_residue(fn, center: complex, radius: float, points: int = 256):
    """(1 / 2 pi i) contour integral of fn around ``center`` (trapezoid on the circle).

    ``fn`` maps an array of contour points (shape (points,)) to values with the
    contour along axis 0.
    """
    rim = radius * np.exp(2j * np.pi * np.arange(points) / points)
    values = np.asarray(fn(center + rim))
    rim = rim.reshape((points,) + (1,) * (values.ndim - 1))
    return np.mean(values * rim, axis=0)


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """A boundary/residue operator in spectral form, kernel form, or as a matrix.

    ``spectral`` is m(lambda) for the single state ``state``; ``matrix`` is the
    element of M (residues); ``kernel`` is a level-0 Gaussian spec acting by
    convolution on sections.
    """

    form: Literal["spectral_function", "grid_kernel", "matrix"]
    state: Optional[Functional] = None
    spectral: Optional[LambdaFunction] = None
    matrix: Optional[np.ndarray] = None
    kernel: Optional[InterpolatorSpec] = None
    notes: tuple = field(default_factory=tuple)

    def apply(self, section: GridSection) -> GridSection:
        """Kernel form: section -> f . section (level-0 convolution)."""
        if self.kernel is None:
            raise UnsupportedForm(f"{self.form} operators do not act on grid sections")
        restricted = section_of(self.kernel, section.grid, section.reference)
        return convolve(restricted, section)


def _scalar_factor(matrix: np.ndarray, tol: float = POWER_TOL) -> Optional[complex]:
    c = complex(np.trace(matrix)) / matrix.shape[0]
    if float(np.max(np.abs(matrix - c * np.eye(matrix.shape[0])))) <= tol * max(1.0, abs(c)):
        return c
    return None


def _single_state_scalars(spec: InterpolatorSpec) -> list[complex]:
    state = spec.terms[0].state
    scalars = []
    for term in spec.terms:
        if not term.state.same_as(state):
            raise UnsupportedForm("Spectral form needs one state across all terms")
        left, right = _scalar_factor(term.left), _scalar_factor(term.right)
        if left is None or right is None:
            raise UnsupportedForm("Spectral form needs scalar left and right factors")
        scalars.append(left * right)
    return scalars


def _rational_fourier(envelope: RationalPole, lambdas: np.ndarray,
                      rule: ContourRule) -> LambdaFunction:
    """int c/(mu + it) e^{-it lambda} dt as a Jordan-closed residue, per lambda.

    lambda < 0 closes upward and picks a pole with Im >= 0; lambda > 0 closes
    downward and picks a pole with Im < 0. The sample at lambda = 0 belongs to
    the side that carries the pole.
    """
    pole = envelope.pole
    upper = pole.imag >= 0
    sign = 1.0 if upper else -1.0
    lam = lambdas.points
    mask = lam <= 0 if upper else lam >= 0
    values = np.zeros(lam.shape, dtype=complex)
    res = circle_residue(lambda z: envelope(z)[:, None] * np.exp(-1j * np.outer(z, lam[mask])),
                         pole, rule.radius, rule.points)
    values[mask] = sign * 2j * np.pi * res
    at_zero = values[lambdas.half]
    if upper:
        return LambdaFunction(lambdas, values, at_zero, 0.0)
    return LambdaFunction(lambdas, values, 0.0, at_zero)


def boundary_operator(spec: InterpolatorSpec, lambda_grid: LambdaGrid = LambdaGrid(),
                      form: Literal["spectral_function", "grid_kernel"] = "spectral_function",
                      time_grid: TimeGrid = TimeGrid(), rule: ContourRule = ContourRule()) -> BoundaryOperator:
    """int f(t) dt as m(log-generator), or as a convolution kernel."""
    if form == "grid_kernel":
        if not spec.is_gaussian:
            raise UnsupportedForm("Kernel form needs a gaussian_poly interpolator")
        return BoundaryOperator("grid_kernel", kernel=spec)
    if form != "spectral_function":
        raise ValueError(f"Unknown boundary operator form {form!r}")

    scalars = _single_state_scalars(spec)
    lam = lambda_grid.points
    total = LambdaFunction.zero(lambda_grid)
    for c, term in zip(scalars, spec.terms):
        env = term.envelope
        if isinstance(env, RationalPole):
            part = _rational_fourier(env, lambda_grid, rule)
        else:
            part = LambdaFunction.continuous(lambda_grid, env.fourier(time_grid, lam))
        total = total + part * c
    logger.debug("boundary operator of %d terms on %d lambda points", len(spec.terms), lam.size)
    return BoundaryOperator("spectral_function", state=spec.terms[0].state, spectral=total)


def _poles_inside(spec: InterpolatorSpec, rule: ContourRule) -> list[tuple[Term, complex]]:
    lo, hi = spec.strip
    inside = []
    for term in spec.terms:
        for pole in term.envelope.poles:
            depth = -pole.imag
            if min(abs(depth - lo), abs(depth - hi)) < rule.pole_margin:
                raise PoleOnBoundary(f"Pole {pole:.6g} within {rule.pole_margin:g} of the strip boundary")
            if lo < depth < hi:
                inside.append((term, pole))
    return inside


def _contour_radius(spec: InterpolatorSpec, pole: complex, rule: ContourRule) -> float:
    lo, hi = spec.strip
    depth = -pole.imag
    return min(rule.radius, 0.5 * min(depth - lo, hi - depth))


def residue_operator(spec: InterpolatorSpec, lambda_grid: Optional[LambdaGrid] = LambdaGrid(),
                     rule: ContourRule = ContourRule()) -> BoundaryOperator:
    """R_f = 2 pi i sum of residues inside the strip.

    Always returns the matrix; the spectral function is attached when ``spec``
    has one state and scalar factors (and a lambda grid is given).
    """
    inside = _poles_inside(spec, rule)
    d = spec.algebra.dim
    matrix = np.zeros((d, d), dtype=complex)
    for term, pole in inside:
        radius = _contour_radius(spec, pole, rule)
        res = circle_residue(lambda z: term.values(z), pole, radius, rule.points)
        matrix += 2j * np.pi * res

    spectral = None
    state = spec.terms[0].state
    if lambda_grid is not None:
        try:
            scalars = _single_state_scalars(spec)
        except UnsupportedForm:
            scalars = None
        if scalars is not None:
            total = LambdaFunction.zero(lambda_grid)
            lam = lambda_grid.points
            weights = {id(t): c for t, c in zip(spec.terms, scalars)}
            for term, pole in inside:
                radius = _contour_radius(spec, pole, rule)
                res = circle_residue(
                    lambda z: term.envelope(z)[:, None] * np.exp(-1j * np.outer(z, lam)),
                    pole, radius, rule.points)
                total = total + LambdaFunction.continuous(lambda_grid, 2j * np.pi * res) * weights[id(term)]
            spectral = total
    return BoundaryOperator("spectral_function" if spectral is not None else "matrix",
                            state=state, spectral=spectral, matrix=matrix)


def analytic_residue_matrix(spec: InterpolatorSpec, rule: ContourRule = ContourRule()) -> np.ndarray:
    """2 pi i sum Res from the closed-form residues c/i x rho^{i pole} y."""
    d = spec.algebra.dim
    matrix = np.zeros((d, d), dtype=complex)
    for term, pole in _poles_inside(spec, rule):
        matrix += 2j * np.pi * term.envelope.residue() * (term.left @ term.state.power(1j * pole) @ term.right)
    return matrix


def rational_boundary_closed_form(grid: LambdaGrid, mu: complex) -> LambdaFunction:
    """2 pi (1 v phi)^{-mu} for Re mu >= 0, -2 pi (1 ^ phi)^{-mu} otherwise."""
    if complex(mu).real >= 0:
        return cutoff_above(grid, mu) * (2 * np.pi)
    return cutoff_below(grid, mu) * (-2 * np.pi)
