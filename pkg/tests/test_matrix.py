"""Tests for modtrace.calculus.matrix."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


def _random_psd(seed, n=3):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g @ g.conj().T + 0.1 * np.eye(n)


def test_eigh_reconstructs():
    from modtrace.calculus.matrix import eigh
    a = _random_psd(0)
    dec = eigh(a)
    assert dec.support_rank == 3
    assert np.allclose(dec.reconstruct(), a, atol=1e-12)
    assert np.all(np.diff(dec.eigenvalues) >= 0)


def test_eigh_rejects_non_hermitian():
    from modtrace.calculus.matrix import eigh
    from modtrace.errors import NotHermitian
    with pytest.raises(NotHermitian, match="not Hermitian"):
        eigh([[1.0, 1.0], [0.0, 1.0]])


def test_hermitian_tolerance_scales_with_entries():
    from modtrace.calculus.matrix import eigh
    a = np.diag([1e6, 2e6]).astype(complex)
    a[0, 1] = 1e-5
    dec = eigh(a)
    assert dec.support_rank == 2


def test_as_block_rejects_non_square():
    from modtrace.calculus.matrix import as_block
    with pytest.raises(ValueError, match="square"):
        as_block(np.zeros((2, 3)))


def test_psd_rejects_negative_eigenvalue():
    from modtrace.calculus.matrix import psd_decomposition
    from modtrace.errors import NotPSD
    with pytest.raises(NotPSD):
        psd_decomposition(np.diag([1.0, -0.5]))


def test_power_acts_on_support_only():
    from modtrace.calculus.matrix import complex_power
    rho = np.diag([0.25, 0.0])
    assert np.allclose(complex_power(rho, -0.5), np.diag([2.0, 0.0]))
    assert np.allclose(complex_power(rho, 0.0), np.diag([1.0, 0.0]))


def test_imaginary_powers_are_unitary_on_support():
    from modtrace.calculus.matrix import psd_decomposition
    dec = psd_decomposition(_random_psd(1))
    u = dec.power(1j * 0.7)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)


def test_powers_stack_shape():
    from modtrace.calculus.matrix import psd_decomposition
    dec = psd_decomposition(_random_psd(2))
    stack = dec.powers(1j * np.linspace(-1, 1, 5))
    assert stack.shape == (5, 3, 3)
    assert np.allclose(stack[2], np.eye(3))


def test_norms():
    from modtrace.calculus.matrix import norms
    n = norms(np.diag([3.0, -4.0]))
    assert n.op == pytest.approx(4.0)
    assert n.hs == pytest.approx(5.0)
    assert n.trace == pytest.approx(7.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16), re_z=st.floats(-1, 1), im_z=st.floats(-1, 1),
       re_w=st.floats(-1, 1), im_w=st.floats(-1, 1))
def test_power_group_law(seed, re_z, im_z, re_w, im_w):
    from modtrace.calculus.matrix import psd_decomposition
    dec = psd_decomposition(_random_psd(seed))
    z, w = complex(re_z, im_z), complex(re_w, im_w)
    lhs = dec.power(z) @ dec.power(w)
    rhs = dec.power(z + w)
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, np.max(np.abs(rhs)))
