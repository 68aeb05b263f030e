"""
Standard form L^2(M) as Hilbert-Schmidt matrices.

Bimodule actions, the *-operation, GNS vectors rho^{1/2}, relative modular
flows rho_phi^{iz} a rho_psi^{-iz}, the modular extension on the strip
-1 <= Im z <= 0 with its three-lines bound, and the KMS residual. Analytic
continuation is exact through the spectral calculus.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np

from modtrace.calculus.algebra import AlgebraElement, FiniteAlgebra, Functional
from modtrace.calculus.matrix import POWER_TOL, norms
from modtrace.errors import AlgebraMismatch, NotCompressed, NotFaithful, OutOfStrip

logger = logging.getLogger("modtrace.calculus.standard_form")

KMS_TOL = 1e-10
BOUND_TOL = 1e-10
STRIP_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class L2Vector:
    """A vector of L^2(M); inner product (xi|eta) = trace(xi^dagger eta)."""

    algebra: FiniteAlgebra
    matrix: np.ndarray

    def __post_init__(self):
        if not self.algebra.contains(np.asarray(self.matrix)):
            raise AlgebraMismatch(f"Vector is not block diagonal for {self.algebra.blocks}")

    def inner(self, other: "L2Vector") -> complex:
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{other.algebra.blocks} vs {self.algebra.blocks}")
        return complex(np.vdot(self.matrix, other.matrix))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def star(self) -> "L2Vector":
        return L2Vector(self.algebra, self.matrix.conj().T)

    def __add__(self, other: "L2Vector") -> "L2Vector":
        return L2Vector(self.algebra, self.matrix + other.matrix)

    def __sub__(self, other: "L2Vector") -> "L2Vector":
        return L2Vector(self.algebra, self.matrix - other.matrix)


def _m(x) -> np.ndarray:
    return x.matrix if isinstance(x, (AlgebraElement, L2Vector)) else np.asarray(x, dtype=complex)


def _same_algebra(*objects) -> FiniteAlgebra:
    algebras = {o.algebra for o in objects if hasattr(o, "algebra")}
    if len(algebras) > 1:
        raise AlgebraMismatch(f"Mixed algebras: {[a.blocks for a in algebras]}")
    return algebras.pop()



def _require_member(algebra: FiniteAlgebra, a) -> None:
    if isinstance(a, AlgebraElement):
        if a.algebra != algebra:
            raise AlgebraMismatch(f"{a.algebra.blocks} vs {algebra.blocks}")
    elif not algebra.contains(np.asarray(a, dtype=complex)):
        raise AlgebraMismatch(f"a is not an element of blocks {algebra.blocks}")


def gns_vector(phi: Functional) -> L2Vector:
    """phi^{1/2} = rho_phi^{1/2}; ||phi^{1/2}||^2 = phi(1)."""
    return L2Vector(phi.algebra, phi.power(0.5))


def act(a, xi: L2Vector, side: Literal["left", "right"] = "left") -> L2Vector:
    """Left (a xi) or right (xi a) action of M on L^2(M)."""
    if isinstance(a, AlgebraElement):
        _same_algebra(a, xi)
    if side == "left":
        return L2Vector(xi.algebra, _m(a) @ xi.matrix)
    if side == "right":
        return L2Vector(xi.algebra, xi.matrix @ _m(a))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _compression_defect(phi: Functional, psi: Functional, a) -> float:
    a = _m(a)
    compressed = phi.power(0.0) @ a @ psi.power(0.0)
    return float(np.max(np.abs(compressed - a))) if a.size else 0.0


def require_compressed(phi: Functional, psi: Functional, a, tol: float = POWER_TOL) -> None:
    defect = _compression_defect(phi, psi, a)
    scale = max(1.0, float(np.max(np.abs(_m(a)))))
    if defect > tol * scale:
        raise NotCompressed(f"a differs from [phi] a [psi] by {defect:.3e} (tol {tol:.1e})")


def relative_modular_flow(phi: Functional, psi: Functional, a, z: complex,
                          tol: float = POWER_TOL) -> AlgebraElement:
    """sigma_z^{phi,psi}(a) = rho_phi^{iz} a rho_psi^{-iz}."""
    algebra = _same_algebra(phi, psi, a) if isinstance(a, AlgebraElement) else _same_algebra(phi, psi)
    require_compressed(phi, psi, a, tol)
    return AlgebraElement(algebra, phi.power(1j * z) @ _m(a) @ psi.power(-1j * z))


def _check_strip(z: complex) -> float:
    r = -complex(z).imag
    if r < -STRIP_SLACK or r > 1 + STRIP_SLACK:
        raise OutOfStrip(f"Im z = {complex(z).imag:g} is outside [-1, 0]")
    return min(max(r, 0.0), 1.0)


def modular_extension(phi: Functional, psi: Functional, a, z: complex) -> AlgebraElement:
    """rho_phi^{iz} a rho_psi^{1-iz} for -1 <= Im z <= 0 (an element of M_*)."""
    _check_strip(z)
    algebra = _same_algebra(phi, psi)
    _require_member(algebra, a)
    return AlgebraElement(algebra, phi.power(1j * z) @ _m(a) @ psi.power(1 - 1j * z))


class ThreeLines(NamedTuple):
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + BOUND_TOL


def three_lines_bound(phi: Functional, psi: Functional, a, z: complex) -> ThreeLines:
    """||ext(z)||_tr against ||rho_phi a||_tr^r ||a rho_psi||_tr^{1-r}, r = -Im z."""
    r = _check_strip(z)
    value = norms(modular_extension(phi, psi, a, z).matrix).trace
    left = norms(phi.density @ _m(a)).trace
    right = norms(_m(a) @ psi.density).trace
    return ThreeLines(value, left ** r * right ** (1 - r))


def kms_check(phi: Functional, psi: Functional, a, t: float, tol: float = POWER_TOL) -> float:
    """L^2 residual between the continuation at z = t - i/2 and phi^{1/2} sigma_t(a).

    The continuation rho_phi^{iz} a rho_psi^{-iz+1/2} is taken in one complex
    power per side; the right-hand side composes the real-time flow with the
    GNS vector.
    """
    require_compressed(phi, psi, a, tol)
    z = complex(t, -0.5)
    continued = phi.power(1j * z) @ _m(a) @ psi.power(-1j * z + 0.5)
    flowed = relative_modular_flow(phi, psi, a, t, tol).matrix
    return float(np.linalg.norm(continued - gns_vector(phi).matrix @ flowed))


def modular_operator_residual(phi: Functional, a) -> float:
    """|| Delta_phi^{1/2}(a phi^{1/2}) - phi^{1/2} a || on [phi] M [phi].

    Delta_phi^{1/2} acts as xi -> rho^{1/2} xi rho^{-1/2}.
    """
    p = phi.power(0.0)
    a = p @ _m(a) @ p
    root = phi.power(0.5)
    delta_applied = root @ (a @ root) @ phi.power(-0.5)
    return float(np.linalg.norm(delta_applied - root @ a))


def cocycle(phi: Functional, psi: Functional, t: float) -> np.ndarray:
    """Connes cocycle (phi:psi)_t = rho_phi^{it} rho_psi^{-it}."""
    return phi.power(1j * t) @ psi.power(-1j * t)


def cocycle_residual(phi: Functional, psi: Functional, s: float, t: float,
                     chi: Functional | None = None) -> float:
    """Cocycle identity (phi:psi)_{s+t} = (phi:psi)_s sigma^psi_s((phi:psi)_t).

    With ``chi`` the chain rule (phi:psi)_t (psi:chi)_t = (phi:chi)_t is
    checked as well; both need psi faithful.
    """
    if not psi.is_faithful:
        raise NotFaithful(f"Cocycles relative to psi need psi faithful (support rank "
                          f"{psi.decomposition.support_rank} of {psi.algebra.dim})")
    composed = cocycle(phi, psi, s) @ psi.power(1j * s) @ cocycle(phi, psi, t) @ psi.power(-1j * s)
    residual = float(np.linalg.norm(composed - cocycle(phi, psi, s + t), ord=2))
    if chi is not None:
        chained = cocycle(phi, psi, t) @ cocycle(psi, chi, t)
        residual = max(residual, float(np.linalg.norm(chained - cocycle(phi, chi, t), ord=2)))
    return residual


def gram_positivity(xs: Sequence, states: Sequence[Functional], ys: Sequence) -> float:
    """Smallest eigenvalue of the Gram matrix of the vectors x_j rho_j^{1/2} y_j."""
    vectors = [(_m(x) @ w.power(0.5) @ _m(y)).ravel() for x, w, y in zip(xs, states, ys)]
    stacked = np.array(vectors)
    gram = stacked.conj() @ stacked.T
    return float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[0])
