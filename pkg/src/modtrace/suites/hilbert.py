"""
Hilbert algebra axioms of the crossed product and the section algebra.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.algebra import FiniteAlgebra
from modtrace.calculus.crossed_product import (
    associativity,
    cauchy_shift_residual,
    hs_coherence,
    inner_product,
    left_multiplication_bound,
    l1_norm,
    scaling_check,
    spectral_unitarity,
    star_symmetry,
)
from modtrace.calculus.interpolators import GaussianPoly, compatibility_residual, section_of
from modtrace.calculus.sampling import random_element, random_faithful, random_gaussian_spec
from modtrace.calculus.sections import GridSection, TimeGrid, convolve, scale_theta, star
from modtrace.data.report import ReportRow
from modtrace.suites import as_list, registry

logger = logging.getLogger("modtrace.suites.hilbert")


@registry.register(
    name="hilbert_algebra_axioms",
    description="Star symmetry, positivity, L1 bounds, associativity, scaling and trace property on Gaussian interpolators.",
    category="algebra",
    parameters={"samples": "Random (f, g, h) triples", "sizes": "Block sizes drawn from",
                "T": "Half width of the section grid", "dt": "Step of the section grid"},
)
def hilbert_algebra_axioms(ctx, samples: int = 50, sizes=(2, 3, 4), T: float = 12.0,
                           dt: float = 0.02) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    grid = TimeGrid(T, dt)
    sizes = [int(n) for n in as_list(sizes)]
    worst = dict.fromkeys(("star", "positive", "l1", "left", "assoc", "cauchy",
                           "scaling", "hs", "compat", "trace"), 0.0)
    for _ in range(int(samples)):
        algebra = FiniteAlgebra((int(rng.choice(sizes)),))
        phi = random_faithful(rng, algebra, **tol.functional_options)
        f, g, h = (random_gaussian_spec(rng, phi, terms=2) for _ in range(3))

        sym = star_symmetry(f, g, grid)
        worst["star"] = max(worst["star"], sym.abs_err / max(inner_product(f, f, grid).real, 1e-300))
        worst["positive"] = max(worst["positive"], -inner_product(f, f, grid).real)

        a, b = section_of(f, grid, phi), section_of(g, grid, phi)
        product = convolve(a, b).l1_norm()
        worst["l1"] = max(worst["l1"], (product - l1_norm(f, grid) * l1_norm(g, grid)) / product)
        lhs, bound = left_multiplication_bound(f, g, grid)
        worst["left"] = max(worst["left"], (lhs - bound) / max(bound, 1e-300))

        worst["assoc"] = max(worst["assoc"], associativity(f, g, h, grid, phi))
        worst["cauchy"] = max(worst["cauchy"], cauchy_shift_residual(f, g, grid, (0.0, 0.7, -1.3)))
        for s in (1.0, -1.0):
            worst["scaling"] = max(worst["scaling"], scaling_check(f, s, grid).rel_err)
        worst["hs"] = max(worst["hs"], hs_coherence(f, grid).rel_err)
        z = complex(rng.uniform(-1, 1), -rng.uniform(0, 1))
        worst["compat"] = max(worst["compat"], compatibility_residual(f, z, phi))

        # tau(f* g) = conj tau(g* f)
        one = inner_product(f, g, grid)
        other = inner_product(g, f, grid)
        worst["trace"] = max(worst["trace"], abs(one - np.conj(other)) / max(abs(one), 1e-300))

    params = {"samples": samples, "sizes": sizes, "T": T, "dt": dt}
    return [
        ReportRow.expectation("hilbert.star_symmetry", worst["star"], tol.axiom, params),
        ReportRow.bound("hilbert.positivity", worst["positive"], 0.0, tol.axiom, params,
                        note="-(f|f) maximised over samples"),
        ReportRow.bound("hilbert.l1_submultiplicative", 1.0 + worst["l1"], 1.0, tol.axiom, params,
                        note="||fg||_1 / (||f||_1 ||g||_1)"),
        ReportRow.bound("hilbert.left_multiplication", 1.0 + worst["left"], 1.0, tol.axiom, params,
                        note="||fg||_H / (||f||_1 ||g||_H)"),
        ReportRow.expectation("hilbert.associativity", worst["assoc"], tol.assoc, params),
        ReportRow.expectation("hilbert.cauchy_shift", worst["cauchy"], tol.assoc, params),
        ReportRow.expectation("hilbert.scaling", worst["scaling"], tol.exact, params, note="s = +1, -1"),
        ReportRow.expectation("hilbert.hs_coherence", worst["hs"], tol.spectral, params),
        ReportRow.expectation("hilbert.modular_compatibility", worst["compat"], tol.power, params),
        ReportRow.expectation("hilbert.trace_property", worst["trace"], tol.axiom, params),
    ]


@registry.register(
    name="section_algebra",
    description="Twisted convolution of sections: FFT against direct sums, star, theta_s, central shortcut.",
    category="algebra",
    parameters={"samples": "Random section pairs", "T": "Half width of the section grid",
                "dt": "Step of the section grid"},
)
def section_algebra(ctx, samples: int = 3, T: float = 8.0, dt: float = 0.04) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    grid = TimeGrid(T, dt)
    algebra = ctx.algebra
    worst = dict.fromkeys(("fft", "involution", "antihom", "theta", "central"), 0.0)
    for _ in range(int(samples)):
        reference = random_faithful(rng, algebra, **tol.functional_options)
        other = random_faithful(rng, algebra, **tol.functional_options)
        f = GridSection.gaussian(grid, reference, float(rng.uniform(0.5, 1.5)),
                                 complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
                                 left=random_element(rng, algebra), state=other,
                                 right=random_element(rng, algebra))
        g = GridSection.gaussian(grid, reference, float(rng.uniform(0.5, 1.5)),
                                 left=random_element(rng, algebra), state=reference)

        fast, slow = convolve(f, g, "fft"), convolve(f, g, "direct")
        worst["fft"] = max(worst["fft"], fast.distance(slow) / max(slow.l1_norm(), 1e-300))
        worst["involution"] = max(worst["involution"], star(star(f)).distance(f) / f.l1_norm())
        lhs, rhs = star(convolve(f, g)), convolve(star(g), star(f))
        worst["antihom"] = max(worst["antihom"], lhs.distance(rhs) / max(rhs.l1_norm(), 1e-300))
        s = float(rng.uniform(-2, 2))
        moved = scale_theta(convolve(f, g), s)
        composed = convolve(scale_theta(f, s), scale_theta(g, s))
        worst["theta"] = max(worst["theta"], moved.distance(composed) / max(moved.l1_norm(), 1e-300))

        a = GridSection.scalar(grid, reference, lambda t: np.exp(-t ** 2), 0.5)
        b = GridSection.scalar(grid, reference, lambda t: np.exp(-0.5 * t ** 2 + 0.2 * t), 0.25)
        shortcut, twisted = convolve(a, b, "auto"), convolve(a, b, "fft")
        worst["central"] = max(worst["central"], shortcut.distance(twisted) / max(twisted.l1_norm(), 1e-300))

    params = {"samples": samples, "T": T, "dt": dt}
    return [
        ReportRow.expectation("sections.fft_matches_direct", worst["fft"], tol.conv, params),
        ReportRow.expectation("sections.star_involution", worst["involution"], tol.conv, params),
        ReportRow.expectation("sections.star_antihomomorphism", worst["antihom"], tol.conv, params),
        ReportRow.expectation("sections.theta_homomorphism", worst["theta"], tol.conv, params),
        ReportRow.expectation("sections.central_shortcut", worst["central"], tol.conv, params),
    ]


@registry.register(
    name="spectral_unitarity",
    description="||g tau^(1/2)||^2 on the time grid against the lambda-model of |G^|^2.",
    category="algebra",
    parameters={"alpha": "Gaussian rates", "beta": "Linear coefficient (real)", "state": "Named state"},
)
def spectral_unitarity_suite(ctx, alpha=(0.5, 1.0, 2.0), beta: float = 0.2, state=None) -> list[ReportRow]:
    phi = ctx.state(state)
    rows = []
    for a in as_list(alpha):
        result = spectral_unitarity(GaussianPoly(float(a), float(beta)), phi, ctx.grid, ctx.lambda_grid)
        rows.append(ReportRow.compare("spectral_unitarity", result.lhs, result.rhs, ctx.tol.spectral,
                                      {"alpha": a, "beta": beta}))
    return rows