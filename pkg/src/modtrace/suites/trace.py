"""
Haagerup trace formula, its x-form, the Trace Formula with residues, and grid convergence.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.algebra import Functional, Weight
from modtrace.calculus.crossed_product import haagerup_trace as trace_two_ways
from modtrace.calculus.crossed_product import trace_formula_theorem_check
from modtrace.calculus.interpolators import GaussianPoly, RationalPole, simple_spec
from modtrace.calculus.sampling import random_element
from modtrace.calculus.sections import TimeGrid
from modtrace.data.report import ReportRow
from modtrace.errors import DivergentTrace
from modtrace.suites import as_complex, as_list, registry

logger = logging.getLogger("modtrace.suites.trace")


def split_weight(omega: Functional) -> Weight:
    """omega as an orthogonal sum of rank-one functionals, one per eigenvector of each block."""
    algebra = omega.algebra
    summands = []
    for k, (offset, n) in enumerate(zip(algebra.offsets, algebra.blocks)):
        block = omega.density[offset:offset + n, offset:offset + n]
        values, vectors = np.linalg.eigh(0.5 * (block + block.conj().T))
        for value, vector in zip(values, vectors.T):
            if value <= omega.support_cutoff * max(values[-1], 0.0):
                continue
            blocks = [np.zeros((m, m), dtype=complex) for m in algebra.blocks]
            blocks[k] = value * np.outer(vector, vector.conj())
            summands.append(Functional.from_blocks(algebra, blocks, support_cutoff=omega.support_cutoff,
                                                 hermitian_tol=omega.hermitian_tol))
    return Weight(tuple(summands))


def _mu_params(mu, weight: bool) -> dict:
    return {"mu": mu, "weight": weight}


@registry.register(
    name="haagerup_trace",
    description="tau((1 v w)^-mu) = w(1) / (2 pi (mu + 1)) by boundary vectors and by the lambda-model.",
    category="trace",
    parameters={"mu": "Exponents (numbers or [re, im])", "state": "Named state",
                "weight": "Split the state into an orthogonal sum first",
                "divergent": "Exponent expected to report DivergentTrace (null to skip)"},
)
def haagerup_trace(ctx, mu=(0.0, 0.5, 1.0, 2.0), state=None, weight: bool = False,
                   divergent=-1.5) -> list[ReportRow]:
    tol = ctx.tol
    omega = ctx.state(state)
    target = split_weight(omega) if weight else omega
    rows = []
    for m in as_list(mu):
        m = as_complex(m)
        result = trace_two_ways(None, target, m, ctx.grid, ctx.lambda_grid)
        params = _mu_params(m, weight)
        rows.append(ReportRow.compare("haagerup_trace.grid", result.grid, result.expected,
                                      tol.haagerup, params))
        rows.append(ReportRow.compare("haagerup_trace.spectral", result.spectral, result.expected,
                                      tol.spectral, params))

    if divergent is not None:
        try:
            trace_two_ways(None, target, as_complex(divergent), ctx.grid, ctx.lambda_grid)
            raised = 0.0
        except DivergentTrace:
            raised = 1.0
        rows.append(ReportRow.compare("haagerup_trace.divergent", raised, 1.0, 0.0,
                                      _mu_params(as_complex(divergent), weight),
                                      note="DivergentTrace raised for Re mu <= -1"))
    return rows


@registry.register(
    name="haagerup_x_form",
    description="tau(x (1 v w)^-mu) = w(x) / (2 pi (mu + 1)) for matrix units and a random Hermitian x.",
    category="trace",
    parameters={"mu": "Exponents, Re mu > -1", "state": "Named state"},
)
def haagerup_x_form(ctx, mu=(0.5, 1.0, -0.5), state=None) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    omega = ctx.state(state)
    algebra = omega.algebra
    xs = {"E11": algebra.matrix_unit(0, 0, 0)}
    if algebra.blocks[0] > 1:
        xs["E12+E21"] = algebra.matrix_unit(0, 0, 1) + algebra.matrix_unit(0, 1, 0)
    xs["hermitian"] = random_element(rng, algebra, hermitian=True)

    rows = []
    for m in as_list(mu):
        m = as_complex(m)
        for label, x in xs.items():
            result = trace_two_ways(x, omega, m, ctx.grid, ctx.lambda_grid)
            params = {"mu": m, "x": label}
            rows.append(ReportRow.compare("haagerup_x_form.grid", result.grid, result.expected,
                                          tol.haagerup, params))
            rows.append(ReportRow.compare("haagerup_x_form.spectral", result.spectral, result.expected,
                                          tol.spectral, params))
    return rows


@registry.register(
    name="trace_formula",
    description="tau((f + R_f)*(f + R_f)) = ||f tau^(1/2)||^2 for (beta + iz)^-1 phi^(iz), plus a pole-free case.",
    category="trace",
    parameters={"beta": "Pole parameters in (-1/2, 0)", "mass": "Values of phi(1), one per beta",
                "state": "Named state (rescaled to each mass)", "alpha": "Rate of the pole-free Gaussian"},
)
def trace_formula(ctx, beta=(-0.3, -0.25), mass=(1.0, 2.0), state=None, alpha: float = 1.0) -> list[ReportRow]:
    tol = ctx.tol
    base = ctx.state(state)
    betas, masses = as_list(beta), as_list(mass)
    if len(masses) == 1:
        masses = masses * len(betas)
    if len(masses) != len(betas):
        raise ValueError(f"mass needs one entry or one per beta, got {len(masses)} for {len(betas)}")

    rows = []
    for b, m in zip(betas, masses):
        phi = base * (float(m) / base.total_mass)
        spec = simple_spec(RationalPole(float(b)), phi)
        result = trace_formula_theorem_check(spec, ctx.grid, ctx.lambda_grid, ctx.contour)
        params = {"beta": b, "mass": m}
        rows.append(ReportRow.compare("trace_formula.spectral", result.lhs, result.expected,
                                      tol.haagerup, params, note="tau((f + R_f)*(f + R_f))"))
        rows.append(ReportRow.compare("trace_formula.grid", result.rhs, result.expected,
                                      tol.haagerup, params, note="||f tau^(1/2)||^2"))
        rows.append(ReportRow.compare("trace_formula.routes", result.lhs, result.rhs,
                                      2 * tol.haagerup, params))

    pole_free = trace_formula_theorem_check(simple_spec(GaussianPoly(alpha), base), ctx.grid,
                                            ctx.lambda_grid, ctx.contour)
    rows.append(ReportRow.compare("trace_formula.pole_free", pole_free.lhs, pole_free.rhs,
                                  tol.spectral, {"alpha": alpha}, note="R_f = 0"))
    return rows


@registry.register(
    name="grid_convergence",
    description="Haagerup grid-route error shrinks as T grows and dt shrinks.",
    category="convergence",
    parameters={"mu": "Exponents", "steps": "[[T, dt], ...] from coarse to fine", "state": "Named state",
                "floor": "Noise floor added to each previous error"},
)
def grid_convergence(ctx, mu=(0.0, 0.5, 1.0, 2.0), steps=((20.0, 0.02), (40.0, 0.02), (40.0, 0.01)),
                     state=None, floor: float = 1e-12) -> list[ReportRow]:
    omega = ctx.state(state)
    grids = [TimeGrid(float(T), float(dt)) for T, dt in steps]
    rows = []
    for m in as_list(mu):
        m = as_complex(m)
        errors = []
        for grid in grids:
            result = trace_two_ways(None, omega, m, grid, ctx.lambda_grid)
            errors.append(abs(result.grid - result.expected) / abs(result.expected))
        logger.debug("mu=%s errors %s", m, errors)
        for (coarse, fine), (before, after) in zip(zip(grids, grids[1:]), zip(errors, errors[1:])):
            params = {"mu": m, "coarse": coarse.to_dict(), "fine": fine.to_dict()}
            rows.append(ReportRow.bound("grid_convergence.monotone", after, before + floor,
                                        ctx.tol.bound, params, note=f"relative errors {before:.3e} -> {after:.3e}"))
    return rows
