"""
Seeded random instances for the property suites.

Densities are drawn as G G^dagger / trace * mass with G a complex Gaussian
block (optionally rank-deficient). GENERATOR_VERSION is bumped whenever the
draw order changes; that is a breaking change for stored reports.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np

from modtrace.calculus.algebra import AlgebraElement, FiniteAlgebra, Functional
from modtrace.calculus.matrix import HERMITIAN_TOL, SUPPORT_CUTOFF

GENERATOR_VERSION = 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_element(rng: np.random.Generator, algebra: FiniteAlgebra,
                   hermitian: bool = False, scale: float = 1.0) -> AlgebraElement:
    blocks = []
    for n in algebra.blocks:
        g = _gaussian(rng, n, n)
        if hermitian:
            g = 0.5 * (g + g.conj().T)
        blocks.append(g)
    element = algebra.element(blocks)
    norm = element.norm()
    return element * (scale / norm) if norm > 0 else element


def random_unitary(rng: np.random.Generator, algebra: FiniteAlgebra) -> AlgebraElement:
    blocks = []
    for n in algebra.blocks:
        q, r = np.linalg.qr(_gaussian(rng, n, n))
        blocks.append(q * (np.diag(r) / np.abs(np.diag(r))))
    return algebra.element(blocks)


def random_functional(rng: np.random.Generator, algebra: FiniteAlgebra,
                      rank: Optional[int] = None, mass: float = 1.0,
                      support_cutoff: float = SUPPORT_CUTOFF,
                      hermitian_tol: float = HERMITIAN_TOL) -> Functional:
    """G G^dagger per block, normalised so that phi(1) = mass.

    ``rank`` caps the rank inside every block; None gives full rank. The two
    tolerances are handed to the Functional.
    """
    blocks = []
    for n in algebra.blocks:
        g = _gaussian(rng, n, n if rank is None else min(rank, n))
        blocks.append(g @ g.conj().T)
    density = algebra.element(blocks).matrix
    density *= mass / np.trace(density).real
    return Functional(algebra, density, support_cutoff, hermitian_tol)


def random_faithful(rng: np.random.Generator, algebra: FiniteAlgebra, floor: float = 0.2,
                    **options) -> Functional:
    """State mixed with the normalised trace: spectrum at least floor / dim.

    ``options`` are the Functional tolerances, as for random_functional.
    """
    d = algebra.dim
    drawn = random_functional(rng, algebra, **options)
    return drawn * (1.0 - floor) + replace(drawn, density=np.eye(d) / d) * floor


def random_gaussian_spec(rng: np.random.Generator, state: Functional, terms: int = 1,
                         alpha_range: tuple[float, float] = (0.5, 2.0),
                         beta_scale: float = 0.5):
    """Sum of ``terms`` Gaussian interpolators e^{-alpha z^2 + beta z} x state^{iz} y.

    alpha is real, beta complex with |Re beta|, |Im beta| <= beta_scale, and x, y
    have operator norm one.
    """
    from modtrace.calculus.interpolators import GaussianPoly, InterpolatorSpec, Term

    drawn = []
    for _ in range(terms):
        alpha = float(rng.uniform(*alpha_range))
        beta = complex(rng.uniform(-beta_scale, beta_scale), rng.uniform(-beta_scale, beta_scale))
        x = random_element(rng, state.algebra)
        y = random_element(rng, state.algebra)
        drawn.append(Term(GaussianPoly(alpha, beta), x, state, y))
    return InterpolatorSpec(tuple(drawn))
