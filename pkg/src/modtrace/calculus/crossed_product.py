"""
The Hilbert algebra of the crossed product and its standard trace.

tau is computed on boundary vectors: tau(f* g) = (f tau^{1/2} | g tau^{1/2}) =
int (f(t - i/2) | g(t - i/2)) dt. Every acceptance identity has a second,
independent route: the lambda-model of the abelian part generated by phi^{it}
(tau measure (phi(1) / 2 pi) e^lambda d lambda), or a convolution evaluated
from closed forms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from modtrace.calculus.algebra import AlgebraElement, Functional, Weight
from modtrace.calculus.interpolators import (
    ContourRule,
    GaussianPoly,
    InterpolatorSpec,
    LambdaFunction,
    LambdaGrid,
    RationalPole,
    boundary_operator,
    boundary_vector,
    convolve_at,
    cutoff_above,
    residue_operator,
    section_of,
    simple_spec,
)
from modtrace.calculus.matrix import op_norms
from modtrace.calculus.sections import GridSection, HilbertVector, TimeGrid, convolve, matrix_convolve, scale_theta
from modtrace.errors import DivergentTrace, GridMismatch, NotInN, UnsupportedForm

logger = logging.getLogger("modtrace.calculus.crossed_product")


class Comparison(NamedTuple):
    """Two routes to the same number."""

    lhs: complex
    rhs: complex

    @property
    def abs_err(self) -> float:
        return float(abs(self.lhs - self.rhs))

    @property
    def rel_err(self) -> float:
        scale = abs(self.rhs)
        return self.abs_err / scale if scale > 0 else self.abs_err


def _vector(f: Union[HilbertVector, InterpolatorSpec], grid: Optional[TimeGrid]) -> HilbertVector:
    if isinstance(f, HilbertVector):
        return f
    if grid is None:
        raise GridMismatch("A time grid is needed to sample an interpolator")
    return boundary_vector(f, grid)


def inner_product(f, g, grid: Optional[TimeGrid] = None) -> complex:
    """(f | g) = int (f(t - i/2) | g(t - i/2)) dt."""
    return _vector(f, grid).inner(_vector(g, grid))


def _require_n(*specs: InterpolatorSpec) -> None:
    for spec in specs:
        if not spec.is_gaussian:
            raise NotInN("rational_pole interpolators are not elements of the Hilbert algebra")


def trace_of_product(f: InterpolatorSpec, g: InterpolatorSpec, grid: TimeGrid) -> complex:
    """tau(f* g)."""
    _require_n(f, g)
    return inner_product(f, g, grid)


def trace_by_convolution(f: InterpolatorSpec, grid: TimeGrid) -> complex:
    """tau(f* f) as trace((f* f)(-i)), the product evaluated from closed forms."""
    _require_n(f)
    return complex(np.trace(convolve_at(f.star(), f, -1j, grid)))


def hs_coherence(f: InterpolatorSpec, grid: TimeGrid) -> Comparison:
    return Comparison(trace_by_convolution(f, grid), trace_of_product(f, f, grid))


def star_symmetry(f: InterpolatorSpec, g: InterpolatorSpec, grid: TimeGrid) -> Comparison:
    """(f* | g*) against (g | f)."""
    fv, gv = boundary_vector(f, grid), boundary_vector(g, grid)
    return Comparison(fv.star().inner(gv.star()), gv.inner(fv))


def product_vector(f: InterpolatorSpec, g: Union[InterpolatorSpec, HilbertVector],
                   grid: TimeGrid) -> HilbertVector:
    """Boundary vector of fg: (fg)(u - i/2) = sum_s f(s) g(u - i/2 - s) w_s."""
    gv = _vector(g, grid)
    values = matrix_convolve(f.values(grid.points), gv.values, grid.weights)
    return HilbertVector(grid, gv.algebra, values, gv.decay)


def l1_norm(f: InterpolatorSpec, grid: TimeGrid) -> float:
    """int ||f(s)|| ds at level 0."""
    return float(grid.integrate(op_norms(f.values(grid.points))))


def left_multiplication_bound(f: InterpolatorSpec, g, grid: TimeGrid) -> tuple[float, float]:
    """(||fg||_H, ||f||_1 ||g||_H)."""
    _require_n(f)
    return product_vector(f, g, grid).norm(), l1_norm(f, grid) * _vector(g, grid).norm()


def cauchy_shift_residual(f: InterpolatorSpec, g: InterpolatorSpec, grid: TimeGrid,
                          points) -> float:
    """max over t of the relative gap between sum f(s) g(t-s-i/2) and sum f(s-i/2) g(t-s)."""
    _require_n(f, g)
    shifted = f.shift(-0.5j)
    worst = 0.0
    for t in np.atleast_1d(points):
        lhs = convolve_at(f, g, t - 0.5j, grid)
        rhs = convolve_at(shifted, g, t, grid)
        scale = max(float(np.linalg.norm(rhs)), 1e-300)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst


def scaling_check(f: InterpolatorSpec, s: float, grid: TimeGrid) -> Comparison:
    """tau(theta_s(f)* theta_s(f)) against e^{-s} tau(f* f)."""
    moved = apply_dual_action(s, f)
    return Comparison(trace_of_product(moved, moved, grid), np.exp(-s) * trace_of_product(f, f, grid))


def associativity(f: InterpolatorSpec, g: InterpolatorSpec, h: InterpolatorSpec,
                  grid: TimeGrid, reference: Functional) -> float:
    """L^1 gap between (fg)h and f(gh) as grid sections, relative to ||(fg)h||_1."""
    a, b, c = (section_of(x, grid, reference) for x in (f, g, h))
    left = convolve(convolve(a, b), c)
    right = convolve(a, convolve(b, c))
    return left.distance(right) / max(left.l1_norm(), 1e-300)


# ─── dual action ─────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class NOperator:
    """matrix * (translation by u): elements of M (u = 0) and modular unitaries w^{iu}."""

    matrix: np.ndarray
    translation: float = 0.0

    @classmethod
    def from_element(cls, a) -> "NOperator":
        return cls(a.matrix if isinstance(a, AlgebraElement) else np.asarray(a, dtype=complex))

    @classmethod
    def modular_unitary(cls, omega: Functional, u: float) -> "NOperator":
        return cls(omega.power(1j * u), float(u))

    def apply(self, xi: HilbertVector) -> HilbertVector:
        """(O xi)(t) = matrix xi(t - u)."""
        if self.translation == 0:
            return xi.left_multiply(self.matrix)
        return xi.translate(self.translation, self.matrix)


DualActionTarget = Union[HilbertVector, NOperator, InterpolatorSpec, GridSection]


def apply_dual_action(s: float, target: DualActionTarget) -> DualActionTarget:
    """theta_s on N (phase e^{-isu} on w^{iu}, identity on M) and W_s on vectors."""
    if isinstance(target, HilbertVector):
        return target.phase(s)
    if isinstance(target, NOperator):
        return NOperator(np.exp(-1j * s * target.translation) * target.matrix, target.translation)
    if isinstance(target, InterpolatorSpec):
        return target.dual_phase(s)
    if isinstance(target, GridSection):
        return scale_theta(target, s)
    raise TypeError(f"theta_s does not act on {type(target).__name__}")


def covariance_residual(s: float, operator: NOperator, xi: HilbertVector) -> float:
    """|| W_s(O xi) - theta_s(O)(W_s xi) || relative to ||xi||."""
    lhs = apply_dual_action(s, operator.apply(xi))
    rhs = apply_dual_action(s, operator).apply(apply_dual_action(s, xi))
    return (lhs - rhs).norm() / max(xi.norm(), 1e-300)


# ─── lambda model and Haagerup ───────────────────────────────


def spectral_model(phi: Functional, m: LambdaFunction, x=None) -> complex:
    """(phi(x) / 2 pi) int m(lambda) e^lambda d lambda."""
    value = phi.total_mass if x is None else phi(x)
    return value / (2 * np.pi) * m.tau_integral()


def _as_functional(omega: Union[Functional, Weight]) -> Functional:
    return omega.as_functional() if isinstance(omega, Weight) else omega


def cutoff_vector(omega: Functional, nu: complex, grid: TimeGrid) -> HilbertVector:
    """(1 v w)^{-nu} tau^{1/2}: t -> (1 / 2 pi) (it + nu + 1/2)^{-1} rho^{it} rho^{1/2}."""
    return boundary_vector(simple_spec(RationalPole(nu, 1 / (2 * np.pi)), omega), grid)


class HaagerupTrace(NamedTuple):
    grid: complex
    spectral: complex
    expected: complex


def haagerup_trace(x, omega: Union[Functional, Weight], mu: complex,
                   grid: TimeGrid = TimeGrid(), lambda_grid: LambdaGrid = LambdaGrid()) -> HaagerupTrace:
    """tau(x (1 v w)^{-mu}) by boundary vectors and by the lambda-model.

    The grid route splits (1 v w)^{-mu} = c* d with c = (1 v w)^{-conj(mu)/2},
    d = (1 v w)^{-mu/2} and evaluates (c tau^{1/2} | x d tau^{1/2}).
    """
    mu = complex(mu)
    if mu.real <= -1:
        raise DivergentTrace(f"tau((1 v w)^(-mu)) diverges for Re mu = {mu.real:g} <= -1")
    omega = _as_functional(omega)
    x = omega.algebra.unit() if x is None else x
    matrix = x.matrix if isinstance(x, AlgebraElement) else np.asarray(x, dtype=complex)
    c = cutoff_vector(omega, np.conj(mu) / 2, grid)
    d = cutoff_vector(omega, mu / 2, grid)
    by_grid = c.inner(d.left_multiply(matrix))
    by_spectrum = spectral_model(omega, cutoff_above(lambda_grid, mu), matrix)
    expected = omega(matrix) / (2 * np.pi * (mu + 1))
    logger.debug("haagerup mu=%s grid=%s spectral=%s", mu, by_grid, by_spectrum)
    return HaagerupTrace(by_grid, by_spectrum, expected)


class TraceFormula(NamedTuple):
    lhs: complex
    rhs: complex
    expected: Optional[complex]

    @property
    def rel_err(self) -> float:
        return Comparison(self.lhs, self.rhs).rel_err


def trace_formula_theorem_check(spec: InterpolatorSpec, grid: TimeGrid = TimeGrid(),
                                lambda_grid: LambdaGrid = LambdaGrid(),
                                rule: ContourRule = ContourRule()) -> TraceFormula:
    """tau((f + R_f)*(f + R_f)) against (f tau^{1/2} | f tau^{1/2}).

    Pole-free specs compare the closed-form convolution route with the norm.
    Otherwise the left side is |m_f + m_R|^2 in the lambda-model of the single
    state, with m_f the boundary operator and m_R the residue operator.
    """
    rhs = boundary_vector(spec, grid, rule).inner(boundary_vector(spec, grid, rule)).real
    if not spec.poles:
        return TraceFormula(trace_by_convolution(spec, grid), rhs, None)
    if not all(isinstance(t.envelope, RationalPole) for t in spec.terms):
        raise UnsupportedForm("Trace formula check needs a pure rational_pole spec")
    boundary = boundary_operator(spec, lambda_grid, time_grid=grid, rule=rule).spectral
    residue = residue_operator(spec, lambda_grid, rule).spectral
    if residue is None:
        raise UnsupportedForm("Residue operator has no spectral form for this spec")
    state = spec.terms[0].state
    lhs = state.total_mass / (2 * np.pi) * (boundary + residue).hs_norm2()
    expected = None
    if len(spec.terms) == 1:
        env = spec.terms[0].envelope
        beta = complex(env.mu).real
        if -0.5 < beta < 0 and complex(env.mu).imag == 0:
            expected = 2 * np.pi * state.total_mass * abs(env.coeff) ** 2 / (2 * beta + 1)
    return TraceFormula(lhs, rhs, expected)


def spectral_unitarity(envelope: GaussianPoly, phi: Functional, grid: TimeGrid = TimeGrid(),
                       lambda_grid: LambdaGrid = LambdaGrid()) -> Comparison:
    """||g tau^{1/2}||^2 on the grid against (phi(1)/2 pi) int |G^|^2 e^lambda."""
    vector = boundary_vector(simple_spec(envelope, phi), grid)
    transform = LambdaFunction.continuous(lambda_grid, envelope.fourier(grid, lambda_grid.points))
    return Comparison(vector.inner(vector).real,
                      phi.total_mass / (2 * np.pi) * transform.hs_norm2())
