"""
Modular theory suites: KMS, three-lines, cocycles, majorization, positive cone.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.algebra import FiniteAlgebra, Functional, majorization_check, witness_holds
from modtrace.calculus.sampling import random_element, random_faithful, random_functional
from modtrace.calculus.standard_form import (
    L2Vector,
    act,
    cocycle_residual,
    gram_positivity,
    kms_check,
    modular_operator_residual,
    three_lines_bound,
)
from modtrace.data.report import ReportRow
from modtrace.suites import as_list, registry

logger = logging.getLogger("modtrace.suites.modular")


@registry.register(
    name="modular_analytic",
    description="KMS boundary identity, three-lines bound, Delta relation and Connes cocycle on random instances.",
    category="modular",
    parameters={"samples": "Random (phi, psi, a, z) draws", "sizes": "Block sizes drawn from"},
)
def modular_analytic(ctx, samples: int = 100, sizes=(2, 3)) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    sizes = [int(n) for n in as_list(sizes)]
    kms = delta = cocycle = 0.0
    excess = 0.0
    violations = 0
    for _ in range(int(samples)):
        algebra = FiniteAlgebra((int(rng.choice(sizes)),))
        phi, psi, chi = (random_faithful(rng, algebra, floor=0.1, **tol.functional_options)
                         for _ in range(3))
        a = random_element(rng, algebra)
        t, s = rng.uniform(-3, 3, size=2)
        z = complex(rng.uniform(-3, 3), -rng.uniform(0, 1))

        kms = max(kms, kms_check(phi, psi, a, t, tol.power))
        lines = three_lines_bound(phi, psi, a, z)
        excess = max(excess, (lines.value - lines.bound) / max(lines.bound, 1e-300))
        violations += not lines.holds
        delta = max(delta, modular_operator_residual(phi, a))
        cocycle = max(cocycle, cocycle_residual(phi, psi, s, t, chi))

    params = {"samples": samples, "sizes": sizes}
    return [
        ReportRow.expectation("modular_analytic.kms", kms, tol.kms, params),
        ReportRow.bound("modular_analytic.three_lines", 1.0 + excess, 1.0, tol.bound, params,
                        note=f"{violations} violation(s)"),
        ReportRow.expectation("modular_analytic.modular_operator", delta, tol.kms, params),
        ReportRow.expectation("modular_analytic.cocycle", cocycle, tol.kms, params),
    ]


def _scaled_psd(rng, n: int, norm: float) -> np.ndarray:
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    k = g @ g.conj().T + 0.1 * np.eye(n)
    return k * (norm / np.linalg.eigvalsh(k)[-1])


@registry.register(
    name="majorization",
    description="phi <= psi iff phi^(1/2) = c psi^(1/2) with ||c|| <= 1, on pairs on both sides of the boundary.",
    category="modular",
    parameters={"pairs": "Number of (phi, psi) pairs", "sizes": "Block sizes drawn from",
                "norms": "Operator norms of K in phi = psi^(1/2) K psi^(1/2)",
                "edge": "Relative step below the majorization constant that must fail"},
)
def majorization(ctx, pairs: int = 100, sizes=(2, 3), norms=(0.5, 1.5),
                 edge: float = 1e-5) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    sizes = [int(n) for n in as_list(sizes)]
    levels = [float(k) for k in as_list(norms)]
    mismatches = edge_misses = 0
    witness_gap = 0.0
    for _ in range(int(pairs)):
        algebra = FiniteAlgebra((int(rng.choice(sizes)),))
        psi = random_functional(rng, algebra, **tol.functional_options)
        level = float(rng.choice(levels))
        root = psi.power(0.5)
        phi = Functional(algebra, root @ _scaled_psd(rng, algebra.dim, level) @ root,
                         **tol.functional_options)
        result = majorization_check(phi, psi, tol.majorize)
        mismatches += result.holds != witness_holds(result, tol.majorize)
        witness_gap = max(witness_gap, abs(result.witness_norm ** 2 - level))

        # phi <= lam psi exactly when lam >= ||K|| = level
        faithful = random_faithful(rng, algebra, **tol.functional_options)
        faithful_root = faithful.power(0.5)
        k = _scaled_psd(rng, algebra.dim, level)
        bounded = Functional(algebra, faithful_root @ k @ faithful_root, **tol.functional_options)
        edge_misses += not majorization_check(bounded, faithful * level, tol.majorize).holds
        edge_misses += majorization_check(bounded, faithful * (level * (1.0 - float(edge))),
                                          tol.majorize).holds

    params = {"pairs": pairs, "sizes": sizes, "norms": levels, "edge": edge}
    return [
        ReportRow.expectation("majorization.equivalence", float(mismatches), 0.0, params,
                              note="pairs where the order test and the witness test disagree"),
        ReportRow.expectation("majorization.witness_norm", witness_gap, tol.majorize, params,
                              note="||c||^2 against ||K||"),
        ReportRow.expectation("majorization.edge", float(edge_misses), 0.0, params,
                              note="draws misjudged at lam = ||K|| or just below it"),
    ]


@registry.register(
    name="standard_form_positivity",
    description="Gram positivity of x w^(1/2) y, self-duality of the cone, star and bimodule adjoints in L2(M).",
    category="modular",
    parameters={"samples": "Random draws", "vectors": "Vectors per Gram matrix", "blocks": "Block structure"},
)
def standard_form_positivity(ctx, samples: int = 20, vectors: int = 4, blocks=None) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    algebra = FiniteAlgebra(tuple(int(b) for b in as_list(blocks))) if blocks else ctx.algebra
    gram_low = cone_low = star = adjoint = 0.0
    for _ in range(int(samples)):
        xs = [random_element(rng, algebra) for _ in range(int(vectors))]
        ys = [random_element(rng, algebra) for _ in range(int(vectors))]
        states = [random_functional(rng, algebra, rank=1 + int(rng.integers(algebra.dim)),
                                     **tol.functional_options)
                  for _ in range(int(vectors))]
        gram_low = min(gram_low, gram_positivity(xs, states, ys))

        cone = [L2Vector(algebra, x.matrix @ w.power(0.5) @ x.matrix.conj().T) for x, w in zip(xs, states)]
        for i, xi in enumerate(cone):
            for eta in cone[i:]:
                cone_low = min(cone_low, xi.inner(eta).real)

        xi = L2Vector(algebra, xs[0].matrix @ states[0].power(0.5))
        eta = L2Vector(algebra, ys[0].matrix @ states[-1].power(0.5))
        star = max(star, abs(xi.star().inner(eta.star()) - eta.inner(xi)))
        a = xs[-1]
        adjoint = max(adjoint, abs(act(a, xi).inner(eta) - xi.inner(act(a.H, eta))),
                      abs(act(a, xi, "right").inner(eta) - xi.inner(act(a.H, eta, "right"))))

    params = {"samples": samples, "vectors": vectors, "blocks": list(algebra.blocks)}
    return [
        ReportRow.bound("standard_form.gram_positivity", -gram_low, 0.0, tol.power, params),
        ReportRow.bound("standard_form.cone_self_duality", -cone_low, 0.0, tol.power, params),
        ReportRow.expectation("standard_form.star_isometry", star, tol.power, params),
        ReportRow.expectation("standard_form.bimodule_adjoint", adjoint, tol.power, params),
    ]
