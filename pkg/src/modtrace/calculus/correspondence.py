"""
phi <-> h_phi, functionals against relatively invariant operators.

h_phi is held as a recipe on analytic vectors, (h xi)(t) = rho_phi xi(t + i),
applied to the closed-form interpolator behind xi so that the shift by +i is
exact. The support e = [1 v h] enters through its bounded vector
e tau^{1/2}(t) = (1 / 2 pi) (it + 1/2)^{-1} rho^{it} rho^{1/2}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from modtrace.calculus.algebra import AlgebraElement, Functional
from modtrace.calculus.crossed_product import Comparison, cutoff_vector, spectral_model
from modtrace.calculus.interpolators import (
    InterpolatorSpec,
    LambdaFunction,
    LambdaGrid,
    RationalPole,
    boundary_vector,
    cutoff_above,
    simple_spec,
)
from modtrace.calculus.matrix import POWER_TOL
from modtrace.calculus.sections import HilbertVector, TimeGrid
from modtrace.errors import NotCompressed, NotFaithful

logger = logging.getLogger("modtrace.calculus.correspondence")

CORR_TOL = 1e-5


def _m(x) -> np.ndarray:
    return x.matrix if isinstance(x, AlgebraElement) else np.asarray(x, dtype=complex)


def vector_phase(spec: InterpolatorSpec, s: float) -> InterpolatorSpec:
    """Spec whose boundary vector is W_s applied to the boundary vector of ``spec``."""
    return spec.dual_phase(s).scaled(np.exp(s / 2))


@dataclass(frozen=True, eq=False)
class RelInvariantOperator:
    state: Functional

    def apply_spec(self, spec: InterpolatorSpec) -> InterpolatorSpec:
        return spec.shift(1j).left_multiply(self.state.density)

    def apply(self, spec: InterpolatorSpec, grid: TimeGrid) -> HilbertVector:
        return boundary_vector(self.apply_spec(spec), grid)

    def shadow(self, lambda_grid: LambdaGrid) -> LambdaFunction:
        """Central part in the lambda-model: multiplication by e^{-lambda}."""
        return LambdaFunction.continuous(lambda_grid, np.exp(-lambda_grid.points))

    def support_vector(self, grid: TimeGrid) -> HilbertVector:
        """e tau^{1/2} with e = [1 v h]."""
        return cutoff_vector(self.state, 0.0, grid)


def build_h(phi: Functional) -> RelInvariantOperator:
    return RelInvariantOperator(phi)


def _relative(diff: HilbertVector, xi: HilbertVector) -> float:
    return diff.norm() / max(xi.norm(), 1e-300)


def group_residual(h: RelInvariantOperator, spec: InterpolatorSpec, grid: TimeGrid) -> float:
    """h(h xi) against rho^2 xi(t + 2i)."""
    twice = h.apply(h.apply_spec(spec), grid)
    direct = boundary_vector(spec.shift(2j).left_multiply(h.state.power(2.0)), grid)
    return _relative(twice - direct, direct)


def covariance_residual(h: RelInvariantOperator, spec: InterpolatorSpec, s: float,
                        grid: TimeGrid) -> float:
    """W_s h W_s* xi against e^{-s} h xi."""
    conjugated = vector_phase(h.apply_spec(vector_phase(spec, -s)), s)
    lhs = boundary_vector(conjugated, grid)
    rhs = h.apply(spec, grid) * np.exp(-s)
    return _relative(lhs - rhs, rhs)


def quadratic_form(h: RelInvariantOperator, spec: InterpolatorSpec, grid: TimeGrid) -> complex:
    """(xi | h xi)."""
    return boundary_vector(spec, grid).inner(h.apply(spec, grid))


def positivity_margin(h: RelInvariantOperator, spec: InterpolatorSpec, grid: TimeGrid) -> float:
    """Re (xi | h xi) / ||xi||^2; non-negative up to quadrature error."""
    xi = boundary_vector(spec, grid)
    return quadratic_form(h, spec, grid).real / max(xi.inner(xi).real, 1e-300)


def verify_linearity(phi: Functional, psi: Functional, a, test_vectors: Sequence[InterpolatorSpec],
                     grid: TimeGrid) -> float:
    """Largest relative residual of additivity and of a h_phi a^dagger = h_{a phi a^dagger}."""
    a = _m(a)
    h_phi, h_psi = build_h(phi), build_h(psi)
    h_sum = build_h(phi + psi)
    h_conj = build_h(phi.conjugate_by(a))
    worst = 0.0
    for spec in test_vectors:
        xi = boundary_vector(spec, grid)
        additive = h_sum.apply(spec, grid) - h_phi.apply(spec, grid) - h_psi.apply(spec, grid)
        conjugated = h_phi.apply(spec.left_multiply(a.conj().T), grid).left_multiply(a)
        covariant = conjugated - h_conj.apply(spec, grid)
        worst = max(worst, _relative(additive, xi), _relative(covariant, xi))
    logger.debug("linearity residual %.3e over %d vectors", worst, len(test_vectors))
    return worst


def recover_functional(h: RelInvariantOperator, x, grid: TimeGrid) -> complex:
    """2 pi tau(x e) = 2 pi (e tau^{1/2} | x e tau^{1/2})."""
    e = h.support_vector(grid)
    return 2 * np.pi * e.inner(e.left_multiply(_m(x)))


def reconstruct_density(h: RelInvariantOperator, grid: TimeGrid) -> np.ndarray:
    """rho with rho_ji = phi(E_ij), phi recovered on the matrix units."""
    algebra = h.state.algebra
    d = algebra.dim
    e = h.support_vector(grid)
    rho = np.zeros((d, d), dtype=complex)
    for block, offset in enumerate(algebra.offsets):
        n = algebra.blocks[block]
        for i in range(n):
            for j in range(n):
                unit = algebra.matrix_unit(block, i, j)
                rho[offset + j, offset + i] = 2 * np.pi * e.inner(e.left_multiply(unit.matrix))
    return rho


def support_trace(phi: Functional, grid: TimeGrid, lambda_grid: LambdaGrid) -> Comparison:
    """tau(e) on the grid against the lambda-model with m = 1_{lambda <= 0}."""
    e = cutoff_vector(phi, 0.0, grid)
    return Comparison(e.inner(e), spectral_model(phi, cutoff_above(lambda_grid, 0.0)))


def _require_left_support(phi: Functional, x: np.ndarray, tol: float = POWER_TOL) -> None:
    gap = float(np.max(np.abs(phi.power(0.0) @ x - x)))
    if gap > tol * max(1.0, float(np.max(np.abs(x)))):
        raise NotCompressed(f"x differs from [phi] x by {gap:.3e}")


def verify_averaging(phi: Functional, omega: Functional, x, mu: float,
                     grid: TimeGrid = TimeGrid()) -> Comparison:
    """tau(h x* (1 v w)^{-mu} x) against phi(x* x) / (2 pi mu).

    lhs = (1 / 2 pi) int |g(t)|^2 ||w^{it} x e tau^{1/2}||^2 dt, g(t) = 1 / (it + mu / 2).
    """
    if not omega.is_faithful:
        raise NotFaithful("The averaging identity needs a faithful reference state")
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    x = _m(x)
    _require_left_support(phi, x)
    moved = cutoff_vector(phi, 0.0, grid).left_multiply(x)
    gram = moved.gram()
    unitaries = omega.powers(1j * grid.points)
    sizes = np.einsum("kji,kjl,li->k", unitaries.conj(), unitaries, gram).real
    g2 = 1 / np.abs(1j * grid.points + mu / 2) ** 2
    lhs = grid.integrate(g2 * sizes, "algebraic") / (2 * np.pi)
    rhs = phi(x.conj().T @ x) / (2 * np.pi * mu)
    return Comparison(complex(lhs), rhs)


def verify_inner_lemma(phi: Functional, omega: Functional, x, t: float,
                       grid: TimeGrid = TimeGrid()) -> Comparison:
    """tau(e x* w^{it} x) against phi(x* w^{it} x phi^{-it}) / (2 pi (1 - it))."""
    x = _m(x)
    _require_left_support(phi, x)
    e_spec = simple_spec(RationalPole(0.0, 1 / (2 * np.pi)), phi)
    near = boundary_vector(e_spec, grid).left_multiply(x)
    far = boundary_vector(e_spec.shift(-t), grid).left_multiply(omega.power(1j * t) @ x)
    lhs = near.inner(far)
    rhs = np.trace(phi.power(1 - 1j * t) @ x.conj().T @ omega.power(1j * t) @ x) / (2 * np.pi * (1 - 1j * t))
    return Comparison(lhs, complex(rhs))
