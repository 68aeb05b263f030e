"""
Boundary and residue operators against their closed forms.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.interpolators import (
    GaussianPoly,
    InterpolatorSpec,
    LambdaFunction,
    RationalPole,
    Term,
    analytic_residue_matrix,
    boundary_operator,
    boundary_vector,
    gaussian_fourier,
    power,
    rational_boundary_closed_form,
    residue_operator,
    simple_spec,
    spectral_additivity_residual,
)
from modtrace.calculus.sampling import random_element, random_functional
from modtrace.data.report import ReportRow
from modtrace.errors import NotSquareIntegrable, PoleOnBoundary
from modtrace.suites import as_complex, as_list, registry

logger = logging.getLogger("modtrace.suites.boundary")


@registry.register(
    name="boundary_catalogue",
    description="Boundary operators of c/(mu + iz) and Gaussian envelopes against closed forms.",
    category="boundary",
    parameters={"mu": "Pole parameters of c/(mu + iz)", "alpha": "Gaussian rate",
                "beta": "Gaussian linear coefficient (number or [re, im])", "state": "Named state"},
)
def boundary_catalogue(ctx, mu=(1.0, 0.5, 0.0, -0.3, -0.25), alpha: float = 1.0,
                       beta=(0.3, 0.2), state=None) -> list[ReportRow]:
    tol = ctx.tol
    phi = ctx.state(state)
    lam = ctx.lambda_grid
    rows = []
    for m in as_list(mu):
        m = as_complex(m)
        spec = simple_spec(RationalPole(m), phi)
        numeric = boundary_operator(spec, lam, rule=ctx.contour).spectral
        closed = rational_boundary_closed_form(lam, m)
        rows.append(ReportRow.expectation("boundary.rational_closed_form", numeric.sup_distance(closed),
                                          tol.residue, {"mu": m}))
        starred = boundary_operator(spec.star(), lam, rule=ctx.contour).spectral
        conj = LambdaFunction(lam, np.conj(numeric.values), np.conj(numeric.left_limit),
                             np.conj(numeric.right_limit))
        rows.append(ReportRow.expectation("boundary.star_compatibility", starred.sup_distance(conj),
                                          tol.power, {"mu": m}))

    b = as_complex(beta)
    envelope = GaussianPoly(alpha, b)
    transform = envelope.fourier(ctx.grid, lam.points)
    closed = gaussian_fourier(alpha, b, lam.points)
    rows.append(ReportRow.expectation("boundary.gaussian_fourier",
                                      float(np.max(np.abs(transform - closed))), tol.spectral,
                                      {"alpha": alpha, "beta": b}))
    gauss = simple_spec(envelope, phi)
    starred = boundary_operator(gauss.star(), lam, time_grid=ctx.grid).spectral
    direct = boundary_operator(gauss, lam, time_grid=ctx.grid).spectral
    rows.append(ReportRow.expectation("boundary.star_compatibility",
                                      float(np.max(np.abs(starred.values - np.conj(direct.values)))),
                                      tol.power, {"alpha": alpha, "beta": b}))

    for exponent in (0.5, -0.3, complex(0.2, 1.0)):
        rows.append(ReportRow.expectation("boundary.spectral_additivity",
                                          spectral_additivity_residual(lam, exponent), tol.power,
                                          {"beta": exponent}))

    unit = simple_spec(GaussianPoly(1.0), phi)
    rows.append(ReportRow.compare("boundary.gaussian_norm", boundary_vector(unit, ctx.grid).norm() ** 2,
                                  np.exp(0.5) * np.sqrt(np.pi / 2) * phi.total_mass, tol.spectral,
                                  {"alpha": 1.0}, note="||e^{-z^2} phi^{iz}||^2 at level -1/2"))

    try:
        boundary_vector(simple_spec(RationalPole(-0.5), phi), ctx.grid, ctx.contour)
        raised = 0.0
    except NotSquareIntegrable:
        raised = 1.0
    rows.append(ReportRow.compare("boundary.critical_line_rejected", raised, 1.0, 0.0, {"mu": -0.5}))
    return rows


@registry.register(
    name="residue_contour",
    description="Residue operators by circle quadrature against closed-form residues.",
    category="boundary",
    parameters={"beta": "Pole parameters inside the strip", "strip": "[lo, hi] of the strip",
                "samples": "Random factor draws for the matrix route", "state": "Named state"},
)
def residue_contour(ctx, beta=(-0.25, -0.1, -0.4), strip=(0.0, 0.5), samples: int = 5,
                    state=None) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    phi = ctx.state(state)
    lam = ctx.lambda_grid
    strip = tuple(float(v) for v in as_list(strip))
    rows = []
    for b in as_list(beta):
        b = as_complex(b)
        spec = simple_spec(RationalPole(b), phi, strip=strip)
        spectral = residue_operator(spec, lam, ctx.contour).spectral
        reference = power(lam, b) * (2 * np.pi)
        scale = float(np.max(np.abs(reference.values)))
        rows.append(ReportRow.expectation("residue.spectral", spectral.sup_distance(reference) / scale,
                                          tol.residue, {"beta": b, "strip": strip},
                                          note="sup distance relative to sup 2 pi e^{beta lambda}"))

        worst = 0.0
        for _ in range(int(samples)):
            omega = random_functional(rng, phi.algebra, **tol.functional_options)
            x, y = random_element(rng, phi.algebra), random_element(rng, phi.algebra)
            term_spec = InterpolatorSpec((Term(RationalPole(b, complex(rng.normal(), rng.normal())),
                                               x, omega, y),), strip)
            numeric = residue_operator(term_spec, None, ctx.contour).matrix
            exact = analytic_residue_matrix(term_spec, ctx.contour)
            worst = max(worst, float(np.max(np.abs(numeric - exact))) / max(float(np.max(np.abs(exact))), 1e-300))
        rows.append(ReportRow.expectation("residue.matrix", worst, tol.residue,
                                          {"beta": b, "samples": samples}))

    lo = strip[0]
    try:
        residue_operator(simple_spec(RationalPole(-lo), phi, strip=strip), lam, ctx.contour)
        raised = 0.0
    except PoleOnBoundary:
        raised = 1.0
    rows.append(ReportRow.compare("residue.pole_on_boundary_rejected", raised, 1.0, 0.0, {"mu": -lo}))

    empty = residue_operator(simple_spec(GaussianPoly(1.0), phi, strip=strip), lam, ctx.contour)
    size = max(float(np.max(np.abs(empty.matrix))), float(np.max(np.abs(empty.spectral.values))))
    rows.append(ReportRow.expectation("residue.pole_free_vanishes", size, 0.0, {"strip": strip}))
    return rows