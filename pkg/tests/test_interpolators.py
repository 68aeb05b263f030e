"""Tests for modtrace.calculus.interpolators."""

import json

import numpy as np
import pytest


@pytest.fixture
def gaussian_spec():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_faithful, random_gaussian_spec
    rng = make_rng(21)
    phi = random_faithful(rng, FiniteAlgebra((2,)))
    return random_gaussian_spec(rng, phi, terms=2)


class TestEnvelopes:
    def test_shift_is_exact(self, gaussian_spec):
        zs = np.array([0.3 - 0.2j, -1.1 - 0.4j])
        w = 0.25 - 0.3j
        assert np.allclose(gaussian_spec.shift(w).values(zs), gaussian_spec.values(zs + w), atol=1e-12)

    def test_star(self, gaussian_spec):
        z = 0.4 - 0.3j
        lhs = gaussian_spec.star().values(z)
        rhs = gaussian_spec.values(-np.conj(z)).conj().T
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_rational_pole_location(self):
        from modtrace.calculus.interpolators import RationalPole
        env = RationalPole(-0.3, 2.0)
        assert env.pole == pytest.approx(-0.3j)
        assert env.residue() == pytest.approx(-2.0j)

    def test_rational_dual_phase_unsupported(self):
        from modtrace.calculus.interpolators import RationalPole
        from modtrace.errors import UnsupportedForm
        with pytest.raises(UnsupportedForm):
            RationalPole(1.0).dual_phase(0.5)

    def test_gaussian_needs_positive_rate(self):
        from modtrace.calculus.interpolators import GaussianPoly
        with pytest.raises(ValueError):
            GaussianPoly(-1.0)

    def test_pole_hit(self, omega):
        from modtrace.calculus.interpolators import RationalPole, simple_spec
        from modtrace.errors import PoleHit
        spec = simple_spec(RationalPole(-0.3), omega)
        with pytest.raises(PoleHit):
            spec.values(-0.3j + 1e-5)

    def test_gaussian_fourier_closed_form(self, quick_grids):
        from modtrace.calculus.interpolators import GaussianPoly, gaussian_fourier
        grid, lam = quick_grids
        env = GaussianPoly(0.8, 0.3 - 0.2j)
        lambdas = np.linspace(-5, 5, 41)
        assert np.allclose(env.fourier(grid, lambdas), gaussian_fourier(0.8, 0.3 - 0.2j, lambdas), atol=1e-10)


class TestEvaluation:
    def test_out_of_strip(self, gaussian_spec):
        from modtrace.calculus.interpolators import evaluate_interpolator
        from modtrace.errors import OutOfStrip
        with pytest.raises(OutOfStrip):
            evaluate_interpolator(gaussian_spec, 0.5 + 0.2j)

    def test_compatibility(self, gaussian_spec):
        from modtrace.calculus.interpolators import compatibility_residual
        omega = gaussian_spec.terms[0].state
        assert compatibility_residual(gaussian_spec, 0.3 - 0.4j, omega) <= 1e-10

    def test_critical_line_rejected(self, omega, quick_grids):
        from modtrace.calculus.interpolators import RationalPole, boundary_vector, simple_spec
        from modtrace.errors import NotSquareIntegrable
        with pytest.raises(NotSquareIntegrable):
            boundary_vector(simple_spec(RationalPole(-0.5), omega), quick_grids[0])

    def test_boundary_vector_norm(self, omega, quick_grids):
        from modtrace.calculus.interpolators import RationalPole, boundary_vector, simple_spec
        vector = boundary_vector(simple_spec(RationalPole(-0.3), omega), quick_grids[0])
        assert vector.norm() ** 2 == pytest.approx(5 * np.pi, rel=1e-5)


class TestLambdaModel:
    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.0])
    def test_cutoff_integral(self, mu, quick_grids):
        from modtrace.calculus.interpolators import cutoff_above
        assert cutoff_above(quick_grids[1], mu).tau_integral() == pytest.approx(1 / (mu + 1), rel=1e-6)

    def test_cutoff_below_is_not_integrable(self, quick_grids):
        from modtrace.calculus.interpolators import cutoff_below
        from modtrace.errors import NotIntegrable
        with pytest.raises(NotIntegrable):
            cutoff_below(quick_grids[1], 0.0).tau_integral()

    def test_spectral_additivity(self, quick_grids):
        from modtrace.calculus.interpolators import spectral_additivity_residual
        for beta in (0.5, -0.3, 0.2 + 1j):
            assert spectral_additivity_residual(quick_grids[1], beta) <= 1e-15

    def test_limits_at_zero(self, quick_grids):
        from modtrace.calculus.interpolators import cutoff_above, cutoff_below
        lam = quick_grids[1]
        above, below = cutoff_above(lam, 1.0), cutoff_below(lam, 1.0)
        assert (above.left_limit, above.right_limit) == (1.0, 0.0)
        assert (below.left_limit, below.right_limit) == (0.0, 1.0)


class TestBoundaryOperators:
    @pytest.mark.parametrize("mu", [1.0, 0.5, 0.0, -0.3, -0.25])
    def test_rational_closed_form(self, mu, omega, quick_grids):
        from modtrace.calculus.interpolators import (
            RationalPole,
            boundary_operator,
            rational_boundary_closed_form,
            simple_spec,
        )
        lam = quick_grids[1]
        numeric = boundary_operator(simple_spec(RationalPole(mu), omega), lam).spectral
        assert numeric.sup_distance(rational_boundary_closed_form(lam, mu)) <= 1e-8

    def test_spectral_form_needs_scalar_factors(self, omega, quick_grids):
        from modtrace.calculus.interpolators import RationalPole, boundary_operator, simple_spec
        from modtrace.errors import UnsupportedForm
        spec = simple_spec(RationalPole(1.0), omega, left=np.diag([1.0, 2.0]))
        with pytest.raises(UnsupportedForm):
            boundary_operator(spec, quick_grids[1])

    def test_kernel_form_acts_on_sections(self, omega):
        from modtrace.calculus.interpolators import GaussianPoly, boundary_operator, simple_spec
        from modtrace.calculus.sections import GridSection, TimeGrid
        grid = TimeGrid(6.0, 0.05)
        op = boundary_operator(simple_spec(GaussianPoly(1.0), omega), form="grid_kernel")
        section = GridSection.gaussian(grid, omega, 0.5)
        assert op.apply(section).l1_norm() > 0

    @pytest.mark.parametrize("beta", [-0.25, -0.1, -0.4])
    def test_residue_spectral(self, beta, omega, quick_grids):
        from modtrace.calculus.interpolators import RationalPole, power, residue_operator, simple_spec
        lam = quick_grids[1]
        spectral = residue_operator(simple_spec(RationalPole(beta), omega), lam).spectral
        reference = power(lam, beta) * (2 * np.pi)
        scale = np.max(np.abs(reference.values))
        assert spectral.sup_distance(reference) / scale <= 1e-8

    def test_residue_matrix(self, omega):
        from modtrace.calculus.interpolators import (
            InterpolatorSpec,
            RationalPole,
            Term,
            analytic_residue_matrix,
            residue_operator,
        )
        x = np.array([[1.0, 2.0], [0.5j, -1.0]])
        spec = InterpolatorSpec((Term(RationalPole(-0.2, 1.5 - 0.5j), x, omega, x.conj().T),))
        numeric = residue_operator(spec, None).matrix
        assert np.allclose(numeric, analytic_residue_matrix(spec), atol=1e-10)

    def test_pole_on_boundary(self, omega, quick_grids):
        from modtrace.calculus.interpolators import RationalPole, residue_operator, simple_spec
        from modtrace.errors import PoleOnBoundary
        with pytest.raises(PoleOnBoundary):
            residue_operator(simple_spec(RationalPole(0.0), omega), quick_grids[1])

    def test_pole_free_residue_vanishes(self, omega, quick_grids):
        from modtrace.calculus.interpolators import GaussianPoly, residue_operator, simple_spec
        op = residue_operator(simple_spec(GaussianPoly(1.0), omega), quick_grids[1])
        assert np.all(op.matrix == 0)
        assert np.all(op.spectral.values == 0)


class TestSpecFiles:
    def test_load_spec(self, tmp_path):
        from modtrace.calculus.interpolators import RationalPole, load_spec
        path = tmp_path / "pole.json"
        path.write_text(json.dumps({
            "strip": [0.0, 0.5],
            "terms": [{"envelope": {"kind": "rational_pole", "mu": -0.3},
                       "state": {"diag": [0.75, 0.25]}}],
        }))
        spec = load_spec(path)
        assert isinstance(spec.terms[0].envelope, RationalPole)
        assert spec.poles[0][0] == pytest.approx(-0.3j)
        assert spec.decay == "algebraic"

    def test_load_spec_passes_state_tolerances(self, tmp_path):
        from modtrace.calculus.interpolators import load_spec
        path = tmp_path / "thin.json"
        path.write_text(json.dumps({
            "terms": [{"envelope": {"kind": "gaussian_poly", "alpha": 1.0},
                       "state": {"diag": [1.0, 1e-11]}}],
        }))
        assert load_spec(path).terms[0].state.is_faithful
        coarse = load_spec(path, support_cutoff=1e-10, hermitian_tol=1e-9).terms[0].state
        assert not coarse.is_faithful
        assert coarse.hermitian_tol == 1e-9

    def test_unknown_envelope(self, tmp_path):
        from modtrace.calculus.interpolators import load_spec
        from modtrace.errors import ConfigInvalid
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"terms": [{"envelope": {"kind": "spline"}, "state": {"diag": [1.0]}}]}))
        with pytest.raises(ConfigInvalid, match="spline"):
            load_spec(path)

    def test_missing_file(self, tmp_path):
        from modtrace.calculus.interpolators import load_spec
        from modtrace.errors import IoFailure
        with pytest.raises(IoFailure):
            load_spec(tmp_path / "absent.json")

    def test_dict_form(self, gaussian_spec):
        from modtrace.calculus.interpolators import InterpolatorSpec
        again = InterpolatorSpec.from_dict(json.loads(json.dumps(gaussian_spec.to_dict())))
        assert np.allclose(again.values(0.2 - 0.1j), gaussian_spec.values(0.2 - 0.1j))
