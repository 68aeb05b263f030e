"""Tests for modtrace.calculus.crossed_product."""

import numpy as np
import pytest


@pytest.fixture
def specs():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_faithful, random_gaussian_spec
    rng = make_rng(31)
    phi = random_faithful(rng, FiniteAlgebra((2,)))
    return phi, random_gaussian_spec(rng, phi, terms=2), random_gaussian_spec(rng, phi)


class TestHaagerup:
    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.0, 0.5 + 1.0j])
    def test_both_routes_match_closed_form(self, mu, omega, quick_grids):
        from modtrace.calculus.crossed_product import haagerup_trace
        result = haagerup_trace(None, omega, mu, *quick_grids)
        assert result.expected == pytest.approx(1 / (2 * np.pi * (mu + 1)))
        assert result.grid == pytest.approx(result.expected, rel=1e-4)
        assert result.spectral == pytest.approx(result.expected, rel=1e-6)

    def test_non_central_x(self, omega, quick_grids):
        from modtrace.calculus.crossed_product import haagerup_trace
        x = np.array([[1.0, 2.0 + 1j], [0.5, -1.0]])
        result = haagerup_trace(x, omega, 1.0, *quick_grids)
        assert result.expected == pytest.approx(0.5 / (4 * np.pi))
        assert result.grid == pytest.approx(result.expected, rel=1e-4)

    @pytest.mark.parametrize("mu", [-1.0, -1.5, -2.0 + 1j])
    def test_divergent(self, mu, omega, quick_grids):
        from modtrace.calculus.crossed_product import haagerup_trace
        from modtrace.errors import DivergentTrace
        with pytest.raises(DivergentTrace):
            haagerup_trace(None, omega, mu, *quick_grids)

    def test_weight_matches_its_functional(self, omega, quick_grids):
        from modtrace.calculus.algebra import Functional, Weight
        from modtrace.calculus.crossed_product import haagerup_trace
        weight = Weight((Functional.diagonal([0.75, 0.0]), Functional.diagonal([0.0, 0.25])))
        by_weight = haagerup_trace(None, weight, 0.5, *quick_grids)
        by_state = haagerup_trace(None, omega, 0.5, *quick_grids)
        assert by_weight.grid == pytest.approx(by_state.grid, rel=1e-12)

    @pytest.mark.slow
    def test_default_grids(self, omega):
        from modtrace.calculus.crossed_product import haagerup_trace
        result = haagerup_trace(None, omega, 0.5)
        assert result.grid == pytest.approx(result.expected, rel=1e-5)
        assert result.spectral == pytest.approx(result.expected, rel=1e-5)


class TestTraceFormula:
    @pytest.mark.parametrize("beta,weights,expected", [
        (-0.3, [0.75, 0.25], 5 * np.pi),
        (-0.25, [1.5, 0.5], 8 * np.pi),
    ])
    def test_pole_inside_strip(self, beta, weights, expected, quick_grids):
        from modtrace.calculus.algebra import Functional
        from modtrace.calculus.crossed_product import trace_formula_theorem_check
        from modtrace.calculus.interpolators import RationalPole, simple_spec
        spec = simple_spec(RationalPole(beta), Functional.diagonal(weights))
        result = trace_formula_theorem_check(spec, *quick_grids)
        assert result.expected == pytest.approx(expected)
        assert result.lhs == pytest.approx(expected, rel=1e-6)
        assert result.rhs == pytest.approx(expected, rel=1e-6)
        assert result.rel_err <= 1e-5

    def test_pole_free(self, omega, quick_grids):
        from modtrace.calculus.crossed_product import trace_formula_theorem_check
        from modtrace.calculus.interpolators import GaussianPoly, simple_spec
        result = trace_formula_theorem_check(simple_spec(GaussianPoly(1.0), omega), *quick_grids)
        assert result.expected is None
        assert result.rhs == pytest.approx(np.sqrt(np.pi / 2) * np.exp(0.5), rel=1e-10)
        assert result.rel_err <= 1e-10

    def test_mixed_envelopes_unsupported(self, omega, quick_grids):
        from modtrace.calculus.crossed_product import trace_formula_theorem_check
        from modtrace.calculus.interpolators import GaussianPoly, RationalPole, simple_spec
        from modtrace.errors import UnsupportedForm
        spec = simple_spec(RationalPole(-0.3), omega) + simple_spec(GaussianPoly(1.0), omega)
        with pytest.raises(UnsupportedForm):
            trace_formula_theorem_check(spec, *quick_grids)


class TestHilbertAlgebra:
    def test_star_symmetry(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import star_symmetry
        _, f, g = specs
        assert star_symmetry(f, g, quick_grids[0]).rel_err <= 1e-12

    def test_hs_coherence(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import hs_coherence
        _, f, _ = specs
        assert hs_coherence(f, quick_grids[0]).rel_err <= 1e-9

    def test_scaling(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import scaling_check
        _, f, _ = specs
        assert scaling_check(f, 0.7, quick_grids[0]).rel_err <= 1e-9

    def test_cauchy_shift(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import cauchy_shift_residual
        _, f, g = specs
        assert cauchy_shift_residual(f, g, quick_grids[0], [0.0, 0.4, -1.2]) <= 1e-9

    def test_left_multiplication_bound(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import left_multiplication_bound
        _, f, g = specs
        product, bound = left_multiplication_bound(f, g, quick_grids[0])
        assert 0 < product <= bound * (1 + 1e-9)

    def test_associativity(self, specs):
        from modtrace.calculus.crossed_product import associativity
        from modtrace.calculus.sections import TimeGrid
        phi, f, g = specs
        assert associativity(f, g, f.star(), TimeGrid(10.0, 0.05), phi) <= 1e-7

    def test_rational_specs_are_not_in_n(self, omega, quick_grids):
        from modtrace.calculus.crossed_product import trace_of_product
        from modtrace.calculus.interpolators import RationalPole, simple_spec
        from modtrace.errors import NotInN
        spec = simple_spec(RationalPole(-0.3), omega)
        with pytest.raises(NotInN):
            trace_of_product(spec, spec, quick_grids[0])

    def test_spectral_unitarity(self, omega, quick_grids):
        from modtrace.calculus.crossed_product import spectral_unitarity
        from modtrace.calculus.interpolators import GaussianPoly
        assert spectral_unitarity(GaussianPoly(1.0, 0.2), omega, *quick_grids).rel_err <= 1e-8


class TestDualAction:
    def test_covariance(self, specs, quick_grids):
        from modtrace.calculus.crossed_product import NOperator, covariance_residual
        from modtrace.calculus.interpolators import boundary_vector
        phi, f, _ = specs
        xi = boundary_vector(f, quick_grids[0])
        assert covariance_residual(0.8, NOperator.modular_unitary(phi, 0.5), xi) <= 1e-12
        assert covariance_residual(-1.3, NOperator.from_element(phi.density), xi) <= 1e-12

    def test_phase_on_operators(self, omega):
        from modtrace.calculus.crossed_product import NOperator, apply_dual_action
        u = NOperator.modular_unitary(omega, 2.0)
        moved = apply_dual_action(0.25, u)
        assert np.allclose(moved.matrix, np.exp(-0.5j) * u.matrix)
        assert apply_dual_action(0.25, NOperator.from_element(np.eye(2))).matrix == pytest.approx(np.eye(2))

    def test_unknown_target(self):
        from modtrace.calculus.crossed_product import apply_dual_action
        with pytest.raises(TypeError):
            apply_dual_action(0.5, "not an operator")
