"""
Matrix substrate suite: spectral reconstruction, complex power group law, norms.
"""
from __future__ import annotations

import logging

import numpy as np

from modtrace.calculus.algebra import FiniteAlgebra
from modtrace.calculus.matrix import norms, psd_decomposition
from modtrace.calculus.sampling import random_element, random_functional
from modtrace.data.report import ReportRow
from modtrace.suites import as_list, registry

logger = logging.getLogger("modtrace.suites.substrate")


@registry.register(
    name="matrix_substrate",
    description="Eigen-reconstruction, rho^a rho^b = rho^(a+b), unitarity of rho^(it), norm ordering.",
    category="substrate",
    parameters={"samples": "Random densities per size", "sizes": "Block sizes",
                "rank": "Rank cap for the densities (default full)"},
)
def matrix_substrate(ctx, samples: int = 20, sizes=(2, 3, 4), rank=None) -> list[ReportRow]:
    rng = ctx.rng()
    tol = ctx.tol
    worst = {"reconstruct": 0.0, "group": 0.0, "unitary": 0.0, "norms": 0.0}
    rank_misses = 0
    for n in as_list(sizes):
        algebra = FiniteAlgebra((int(n),))
        for _ in range(int(samples)):
            rho = random_functional(rng, algebra, rank=rank, **tol.functional_options).density
            dec = psd_decomposition(rho, support_cutoff=tol.support_cutoff,
                                    hermitian_tol=tol.hermitian)
            rank_misses += dec.support_rank != (int(n) if rank is None else min(int(rank), int(n)))
            worst["reconstruct"] = max(worst["reconstruct"], float(np.max(np.abs(dec.reconstruct() - rho))))

            a = complex(rng.uniform(-1, 1), rng.normal())
            b = complex(rng.uniform(-1, 1), rng.normal())
            product = dec.power(a) @ dec.power(b)
            worst["group"] = max(worst["group"],
                                 float(np.max(np.abs(product - dec.power(a + b))))
                                 / max(1.0, float(np.max(np.abs(product)))))

            u = dec.power(1j * float(rng.normal()))
            support = dec.projection()
            worst["unitary"] = max(worst["unitary"], float(np.max(np.abs(u.conj().T @ u - support))))

            x = random_element(rng, algebra).matrix
            op, hs, tr = norms(x)
            worst["norms"] = max(worst["norms"], op - hs, hs - tr)

    params = {"samples": samples, "sizes": as_list(sizes)}
    return [
        ReportRow.expectation("matrix_substrate.reconstruct", worst["reconstruct"], tol.reconstruct, params),
        ReportRow.expectation("matrix_substrate.support_rank", float(rank_misses), 0.0, params,
                              note="draws whose support rank differs from the rank cap"),
        ReportRow.expectation("matrix_substrate.power_group_law", worst["group"], tol.power, params),
        ReportRow.expectation("matrix_substrate.imaginary_power_unitary", worst["unitary"], tol.power, params),
        ReportRow.bound("matrix_substrate.norm_ordering", worst["norms"], 0.0, tol.power, params,
                        note="max of ||x||_op - ||x||_hs and ||x||_hs - ||x||_1"),
    ]
