"""Tests for modtrace.calculus.correspondence."""

import numpy as np
import pytest


@pytest.fixture
def phi():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_faithful
    return random_faithful(make_rng(41), FiniteAlgebra((2, 1)))


@pytest.fixture
def vectors(phi):
    from modtrace.calculus.sampling import make_rng, random_gaussian_spec
    rng = make_rng(42)
    return [random_gaussian_spec(rng, phi) for _ in range(3)]


class TestRecovery:
    def test_density_from_matrix_units(self, phi, quick_grids):
        from modtrace.calculus.correspondence import build_h, reconstruct_density
        rho = reconstruct_density(build_h(phi), quick_grids[0])
        assert np.allclose(rho, phi.density, atol=1e-6)

    def test_recover_on_element(self, phi, quick_grids):
        from modtrace.calculus.correspondence import build_h, recover_functional
        from modtrace.calculus.sampling import make_rng, random_element
        x = random_element(make_rng(3), phi.algebra)
        assert recover_functional(build_h(phi), x, quick_grids[0]) == pytest.approx(phi(x), abs=1e-6)

    def test_support_trace(self, phi, quick_grids):
        from modtrace.calculus.correspondence import support_trace
        result = support_trace(phi, *quick_grids)
        assert result.rhs == pytest.approx(1 / (2 * np.pi))
        assert result.rel_err <= 1e-5

    def test_shadow_is_exponential(self, phi, quick_grids):
        from modtrace.calculus.correspondence import build_h
        lam = quick_grids[1]
        shadow = build_h(phi).shadow(lam)
        assert shadow.values[lam.half] == pytest.approx(1.0)
        assert shadow.values[0] == pytest.approx(np.exp(lam.L))


class TestRelativeInvariance:
    def test_group_law(self, phi, vectors, quick_grids):
        from modtrace.calculus.correspondence import build_h, group_residual
        h = build_h(phi)
        assert max(group_residual(h, v, quick_grids[0]) for v in vectors) <= 1e-8

    @pytest.mark.parametrize("s", [0.5, -1.0])
    def test_covariance(self, s, phi, vectors, quick_grids):
        from modtrace.calculus.correspondence import build_h, covariance_residual
        h = build_h(phi)
        assert max(covariance_residual(h, v, s, quick_grids[0]) for v in vectors) <= 1e-8

    def test_linearity(self, phi, vectors, quick_grids):
        from modtrace.calculus.correspondence import verify_linearity
        from modtrace.calculus.sampling import make_rng, random_element, random_faithful
        rng = make_rng(43)
        psi = random_faithful(rng, phi.algebra)
        a = random_element(rng, phi.algebra)
        assert verify_linearity(phi, psi, a, vectors, quick_grids[0]) <= 1e-8

    def test_positivity(self, phi, vectors, quick_grids):
        from modtrace.calculus.correspondence import build_h, positivity_margin
        h = build_h(phi)
        assert min(positivity_margin(h, v, quick_grids[0]) for v in vectors) >= -1e-10


class TestAveraging:
    @pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
    def test_tracial_reference(self, mu, phi, quick_grids):
        from modtrace.calculus.algebra import Functional
        from modtrace.calculus.correspondence import verify_averaging
        from modtrace.calculus.sampling import make_rng, random_element
        omega = Functional(phi.algebra, np.eye(3) / 3)
        x = random_element(make_rng(5), phi.algebra)
        result = verify_averaging(phi, omega, x, mu, quick_grids[0])
        assert result.rel_err <= 1e-5

    def test_non_tracial_reference(self, phi, quick_grids):
        from modtrace.calculus.correspondence import verify_averaging
        from modtrace.calculus.sampling import make_rng, random_element, random_faithful
        rng = make_rng(6)
        omega = random_faithful(rng, phi.algebra)
        result = verify_averaging(phi, omega, random_element(rng, phi.algebra), 1.0, quick_grids[0])
        assert result.rel_err <= 1e-5

    def test_needs_faithful_reference(self, quick_grids):
        from modtrace.calculus.algebra import Functional
        from modtrace.calculus.correspondence import verify_averaging
        from modtrace.errors import NotFaithful
        with pytest.raises(NotFaithful):
            verify_averaging(Functional.diagonal([0.5, 0.5]), Functional.diagonal([1.0, 0.0]),
                             np.eye(2), 1.0, quick_grids[0])

    def test_needs_positive_mu(self, omega, quick_grids):
        from modtrace.calculus.correspondence import verify_averaging
        with pytest.raises(ValueError, match="positive"):
            verify_averaging(omega, omega, np.eye(2), 0.0, quick_grids[0])

    def test_left_support_required(self, omega, quick_grids):
        from modtrace.calculus.algebra import Functional
        from modtrace.calculus.correspondence import verify_averaging
        from modtrace.errors import NotCompressed
        with pytest.raises(NotCompressed):
            verify_averaging(Functional.diagonal([1.0, 0.0]), omega, np.ones((2, 2)), 1.0, quick_grids[0])

    @pytest.mark.parametrize("t", [0.0, 1.0, -2.5])
    def test_inner_lemma(self, t, phi, quick_grids):
        from modtrace.calculus.correspondence import verify_inner_lemma
        from modtrace.calculus.sampling import make_rng, random_element, random_faithful
        rng = make_rng(7)
        omega = random_faithful(rng, phi.algebra)
        result = verify_inner_lemma(phi, omega, random_element(rng, phi.algebra), t, quick_grids[0])
        assert result.rel_err <= 1e-5
