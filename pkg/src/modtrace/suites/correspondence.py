"""
phi <-> h_phi: recovery, linearity, covariance, positivity, averaging and inner lemmas.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.algebra import Functional
from modtrace.calculus.correspondence import (
    build_h,
    covariance_residual,
    group_residual,
    positivity_margin,
    reconstruct_density,
    recover_functional,
    support_trace,
    verify_averaging,
    verify_inner_lemma,
    verify_linearity,
)
from modtrace.calculus.interpolators import boundary_vector
from modtrace.calculus.sampling import (
    random_element,
    random_faithful,
    random_functional,
    random_gaussian_spec,
    random_unitary,
)
from modtrace.data.report import ReportRow
from modtrace.errors import NotFaithful
from modtrace.suites import as_list, registry

logger = logging.getLogger("modtrace.suites.correspondence")


@registry.register(
    name="correspondence",
    description="phi(x) = 2 pi tau(x e), density reconstruction, additivity, u h u* = h_(u phi u*), theta_s(h) = e^-s h.",
    category="correspondence",
    parameters={"state": "Named state", "vectors": "Random analytic test vectors", "s": "Dual action parameter"},
)
def correspondence(ctx, state=None, vectors: int = 20, s: float = 1.0) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    grid = ctx.grid
    phi = ctx.state(state)
    algebra = phi.algebra
    h = build_h(phi)
    rows = []

    for block, n in enumerate(algebra.blocks):
        for i in range(n):
            for j in range(n):
                unit = algebra.matrix_unit(block, i, j)
                rows.append(ReportRow.compare("correspondence.recovery", recover_functional(h, unit, grid),
                                              phi(unit), tol.corr, {"unit": [block, i, j]}))

    rho = reconstruct_density(h, grid)
    gap = float(np.max(np.abs(rho - phi.density))) / float(np.max(np.abs(phi.density)))
    rows.append(ReportRow.expectation("correspondence.reconstruct_density", gap, tol.corr))
    support = support_trace(phi, grid, ctx.lambda_grid)
    rows.append(ReportRow.compare("correspondence.support_trace", support.lhs, support.rhs, tol.corr,
                                  note="tau(e) on the grid against the lambda-model"))
    rows.append(ReportRow.compare("correspondence.support_trace_closed_form", support.lhs,
                                  phi.total_mass / (2 * np.pi), tol.corr))

    reference = random_faithful(rng, algebra, **tol.functional_options)
    tests = [random_gaussian_spec(rng, reference, terms=2) for _ in range(int(vectors))]
    psi = random_functional(rng, algebra, **tol.functional_options)
    params = {"vectors": vectors}
    for label, a in (("unitary", random_unitary(rng, algebra)), ("element", random_element(rng, algebra))):
        rows.append(ReportRow.expectation("correspondence.linearity", verify_linearity(phi, psi, a, tests, grid),
                                          tol.exact, {**params, "a": label}))

    group = max(group_residual(h, spec, grid) for spec in tests)
    rows.append(ReportRow.expectation("correspondence.group_law", group, tol.exact, params))
    covariance = max(covariance_residual(h, spec, s, grid) for spec in tests)
    rows.append(ReportRow.expectation("correspondence.covariance", covariance, tol.exact, {**params, "s": s}))

    singles = [random_gaussian_spec(rng, reference) for _ in range(int(vectors))]
    margin = min(positivity_margin(h, spec, grid) for spec in singles)
    rows.append(ReportRow.bound("correspondence.positivity", -margin, 0.0, tol.corr, params,
                                note="-(xi | h xi) / ||xi||^2"))

    d = algebra.dim
    flat = build_h(Functional(algebra, np.eye(d) / d, **tol.functional_options))
    spec = tests[0]
    expected = boundary_vector(spec.shift(1j), grid) * (1.0 / d)
    residual = (flat.apply(spec, grid) - expected).norm() / max(expected.norm(), 1e-300)
    rows.append(ReportRow.expectation("correspondence.scalar_density", residual, tol.exact,
                                      note="rho = 1/n acts as (1/n) shift by i"))
    return rows


@registry.register(
    name="averaging_lemma",
    description="tau(h x* (1 v w)^-mu x) = phi(x* x) / (2 pi mu) for faithful w.",
    category="correspondence",
    parameters={"mu": "Positive exponents", "samples": "Random (w, x) draws", "state": "Named state (phi)"},
)
def averaging_lemma(ctx, mu=(1.0, 2.0), samples: int = 3, state=None) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    phi = ctx.state(state)
    algebra = phi.algebra
    support = phi.power(0.0)
    rows = []
    for m in as_list(mu):
        for k in range(int(samples)):
            omega = random_faithful(rng, algebra, **tol.functional_options)
            x = support @ random_element(rng, algebra).matrix
            result = verify_averaging(phi, omega, x, float(m), ctx.grid)
            rows.append(ReportRow.compare("averaging_lemma", result.lhs, result.rhs, tol.corr,
                                          {"mu": m, "sample": k}))

    thin = (random_functional(rng, algebra, rank=1, **tol.functional_options)
            if algebra.dim > 1 else None)
    if thin is not None:
        try:
            verify_averaging(phi, thin, support, 1.0, ctx.grid)
            raised = 0.0
        except NotFaithful:
            raised = 1.0
        rows.append(ReportRow.compare("averaging_lemma.requires_faithful", raised, 1.0, 0.0))
    return rows


@registry.register(
    name="inner_lemma",
    description="tau(e x* w^(it) x) = phi(x* w^(it) x phi^(-it)) / (2 pi (1 - it)).",
    category="correspondence",
    parameters={"t": "Times", "samples": "Random (w, x) draws", "state": "Named state (phi)"},
)
def inner_lemma(ctx, t=(0.0, 0.5, 1.0, -2.0), samples: int = 2, state=None) -> list[ReportRow]:
    rng = ctx.rng()
    phi = ctx.state(state)
    algebra = phi.algebra
    support = phi.power(0.0)
    rows = []
    for k in range(int(samples)):
        omega = random_faithful(rng, algebra, **ctx.tol.functional_options)
        x = support @ random_element(rng, algebra).matrix
        for time in as_list(t):
            result = verify_inner_lemma(phi, omega, x, float(time), ctx.grid)
            rows.append(ReportRow.compare("inner_lemma", result.lhs, result.rhs, ctx.tol.corr,
                                          {"t": time, "sample": k}))
    return rows
