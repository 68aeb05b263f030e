"""Tests for modtrace.calculus.standard_form."""

import numpy as np
import pytest


@pytest.fixture
def pair():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_element, random_faithful
    rng = make_rng(11)
    algebra = FiniteAlgebra((2, 1))
    return random_faithful(rng, algebra), random_faithful(rng, algebra), random_element(rng, algebra)


def test_gns_vector_norm_is_mass():
    from modtrace.calculus.algebra import Functional
    from modtrace.calculus.standard_form import gns_vector
    phi = Functional.diagonal([1.5, 0.5])
    assert gns_vector(phi).norm() ** 2 == pytest.approx(2.0)


def test_bimodule_and_star():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_element
    from modtrace.calculus.standard_form import L2Vector, act
    rng = make_rng(1)
    algebra = FiniteAlgebra((3,))
    a, b, c = (random_element(rng, algebra) for _ in range(3))
    xi, eta = L2Vector(algebra, b.matrix), L2Vector(algebra, c.matrix)
    assert act(a, xi).inner(eta) == pytest.approx(xi.inner(act(a.H, eta)), abs=1e-12)
    assert act(a, xi, "right").star().norm() == pytest.approx(act(a.H, xi.star()).norm())
    with pytest.raises(ValueError, match="side"):
        act(a, xi, "middle")


def test_kms_residual(pair):
    from modtrace.calculus.standard_form import kms_check
    phi, psi, a = pair
    for t in (0.0, 0.7, -3.0):
        assert kms_check(phi, psi, a, t) <= 1e-10


def test_three_lines(pair):
    from modtrace.calculus.standard_form import three_lines_bound
    phi, psi, a = pair
    for z in (0.3 - 0.2j, -1.0 - 0.5j, 2.0 - 1.0j, 0.0):
        assert three_lines_bound(phi, psi, a, z).holds


def test_three_lines_edges_are_tight(pair):
    from modtrace.calculus.standard_form import three_lines_bound
    phi, psi, a = pair
    edge = three_lines_bound(phi, psi, a, -1j)
    assert edge.value == pytest.approx(edge.bound, rel=1e-10)


def test_outside_strip_rejected(pair):
    from modtrace.calculus.standard_form import modular_extension
    from modtrace.errors import OutOfStrip
    phi, psi, a = pair
    with pytest.raises(OutOfStrip):
        modular_extension(phi, psi, a, 0.5j)


def test_compression_required():
    from modtrace.calculus.algebra import Functional
    from modtrace.calculus.standard_form import relative_modular_flow
    from modtrace.errors import NotCompressed
    phi = Functional.diagonal([1.0, 0.0])
    psi = Functional.diagonal([0.5, 0.5])
    with pytest.raises(NotCompressed):
        relative_modular_flow(phi, psi, np.eye(2), 0.3)


def test_modular_operator_relation(pair):
    from modtrace.calculus.standard_form import modular_operator_residual
    phi, _, a = pair
    assert modular_operator_residual(phi, a) <= 1e-10


def test_cocycle_identities(pair):
    from modtrace.calculus.sampling import make_rng, random_faithful
    from modtrace.calculus.standard_form import cocycle, cocycle_residual
    phi, psi, _ = pair
    chi = random_faithful(make_rng(5), phi.algebra)
    assert cocycle_residual(phi, psi, 0.4, -1.3, chi) <= 1e-10
    u = cocycle(phi, psi, 0.9)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)


def test_cocycle_needs_faithful_psi():
    from modtrace.calculus.algebra import Functional
    from modtrace.calculus.standard_form import cocycle_residual
    from modtrace.errors import NotFaithful
    phi = Functional.diagonal([0.5, 0.5])
    with pytest.raises(NotFaithful, match="support rank 1 of 2"):
        cocycle_residual(phi, Functional.diagonal([1.0, 0.0]), 0.2, 0.3)


def test_extension_rejects_off_block_operator(pair):
    from modtrace.calculus.standard_form import modular_extension
    from modtrace.errors import AlgebraMismatch
    phi, psi, _ = pair
    off_block = np.zeros((3, 3))
    off_block[0, 2] = 1.0
    with pytest.raises(AlgebraMismatch):
        modular_extension(phi, psi, off_block, -0.5j)
    with pytest.raises(AlgebraMismatch):
        modular_extension(phi, psi, np.eye(2), -0.5j)



def test_gram_positivity():
    from modtrace.calculus.algebra import FiniteAlgebra
    from modtrace.calculus.sampling import make_rng, random_element, random_functional
    from modtrace.calculus.standard_form import gram_positivity
    rng = make_rng(8)
    algebra = FiniteAlgebra((2, 2))
    xs = [random_element(rng, algebra) for _ in range(5)]
    ys = [random_element(rng, algebra) for _ in range(5)]
    states = [random_functional(rng, algebra, rank=1) for _ in range(5)]
    assert gram_positivity(xs, states, ys) >= -1e-12
