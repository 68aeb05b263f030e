"""
The finite-dimensional W*-algebra M = ⊕_k M_{n_k}(C) and its positive normal
functionals.

Elements are stored as dense block-diagonal matrices; the algebra records the
block structure and rejects entries outside the diagonal blocks. Functionals
are unnormalised density matrices, weights are finite orthogonal sums.

In finite dimensions the finitely supported subalgebra M_f coincides with M,
so no separate type exists for it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from modtrace.calculus.matrix import (
    HERMITIAN_TOL,
    POWER_TOL,
    SUPPORT_CUTOFF,
    SpectralDecomposition,
    _scale,
    hermitian_defect,
    norms,
    psd_decomposition,
)
from modtrace.errors import AlgebraMismatch, NotHermitian, NotPSD

logger = logging.getLogger("modtrace.calculus.algebra")

MAJORIZE_TOL = 1e-8


@dataclass(frozen=True)
class FiniteAlgebra:
    """Block dimensions (n_1, ..., n_K) of M."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(n) for n in self.blocks)
        if not blocks or any(n < 1 for n in blocks):
            raise ValueError(f"Algebra needs at least one block of size >= 1, got {self.blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.cumsum((0,) + self.blocks[:-1]))

    @cached_property
    def block_mask(self) -> np.ndarray:
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        for off, n in zip(self.offsets, self.blocks):
            mask[off:off + n, off:off + n] = True
        return mask

    def contains(self, matrix: np.ndarray, tol: float = POWER_TOL) -> bool:
        if matrix.shape != (self.dim, self.dim):
            return False
        outside = np.abs(matrix[~self.block_mask])
        return not outside.size or float(outside.max()) <= tol * max(1.0, float(np.abs(matrix).max()))

    def element(self, blocks: Sequence) -> "AlgebraElement":
        """Assemble an element from per-block matrices."""
        if len(blocks) != len(self.blocks):
            raise AlgebraMismatch(f"Expected {len(self.blocks)} blocks, got {len(blocks)}")
        arrays = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
        if any(a.shape != (n, n) for a, n in zip(arrays, self.blocks)):
            raise AlgebraMismatch(
                f"Block shapes {[a.shape for a in arrays]} do not match dims {self.blocks}"
            )
        return AlgebraElement(self, scipy.linalg.block_diag(*arrays).astype(complex))

    def wrap(self, matrix) -> "AlgebraElement":
        return AlgebraElement(self, np.asarray(matrix, dtype=complex))

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, np.eye(self.dim, dtype=complex))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, np.zeros((self.dim, self.dim), dtype=complex))

    def matrix_unit(self, block: int, i: int, j: int) -> "AlgebraElement":
        """E_ij inside block ``block``."""
        matrix = np.zeros((self.dim, self.dim), dtype=complex)
        off = self.offsets[block]
        matrix[off + i, off + j] = 1.0
        return AlgebraElement(self, matrix)

    def matrix_units(self) -> list["AlgebraElement"]:
        return [self.matrix_unit(k, i, j)
                for k, n in enumerate(self.blocks) for i in range(n) for j in range(n)]

    def to_dict(self) -> dict:
        return {"blocks": list(self.blocks)}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of M stored as a block-diagonal matrix."""

    algebra: FiniteAlgebra
    matrix: np.ndarray

    def __post_init__(self):
        if not self.algebra.contains(self.matrix):
            raise AlgebraMismatch(
                f"Matrix of shape {self.matrix.shape} is not an element of blocks {self.algebra.blocks}"
            )

    @property
    def blocks(self) -> list[np.ndarray]:
        return [self.matrix[o:o + n, o:o + n] for o, n in zip(self.algebra.offsets, self.algebra.blocks)]

    @property
    def H(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.matrix.conj().T)

    def _other(self, other) -> np.ndarray:
        if isinstance(other, AlgebraElement):
            if other.algebra != self.algebra:
                raise AlgebraMismatch(f"{other.algebra.blocks} vs {self.algebra.blocks}")
            return other.matrix
        return np.asarray(other, dtype=complex)

    def __matmul__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.matrix @ self._other(other))

    def __add__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.matrix + self._other(other))

    def __sub__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.matrix - self._other(other))

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        return AlgebraElement(self.algebra, complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def norm(self) -> float:
        return norms(self.matrix).op

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return hermitian_defect(self.matrix) <= tol

    def to_dict(self) -> dict:
        return {"blocks": list(self.algebra.blocks), "values": [_encode(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict, algebra: Optional[FiniteAlgebra] = None) -> "AlgebraElement":
        algebra = algebra or FiniteAlgebra(tuple(data["blocks"]))
        return algebra.element([_decode(b) for b in data["values"]])


@dataclass(frozen=True, eq=False)
class Functional:
    """phi(x) = sum_k trace(rho_k x_k) with rho PSD (total mass free).

    ``support_cutoff`` and ``hermitian_tol`` travel with the functional into
    every decomposition and every functional derived from it.
    """

    algebra: FiniteAlgebra
    density: np.ndarray
    support_cutoff: float = SUPPORT_CUTOFF
    hermitian_tol: float = HERMITIAN_TOL

    def __post_init__(self):
        density = np.asarray(self.density, dtype=complex)
        if not self.algebra.contains(density):
            raise AlgebraMismatch(f"Density is not an element of blocks {self.algebra.blocks}")
        defect = hermitian_defect(density)
        if defect > self.hermitian_tol * _scale(density):
            raise NotHermitian(f"Functional density is not Hermitian: defect {defect:.3e}")
        object.__setattr__(self, "density", 0.5 * (density + density.conj().T))
        # validates Hermitian + PSD eagerly
        self.decomposition

    @classmethod
    def from_blocks(cls, algebra: FiniteAlgebra, blocks: Sequence, **kwargs) -> "Functional":
        return cls(algebra, algebra.element(blocks).matrix, **kwargs)

    @classmethod
    def diagonal(cls, weights: Sequence[float], algebra: Optional[FiniteAlgebra] = None,
                 **kwargs) -> "Functional":
        algebra = algebra or FiniteAlgebra((len(weights),))
        return cls(algebra, np.diag(np.asarray(weights, dtype=complex)), **kwargs)

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        try:
            return psd_decomposition(self.density, support_cutoff=self.support_cutoff,
                                     hermitian_tol=self.hermitian_tol)
        except NotPSD as exc:
            raise NotPSD(f"Functional density is not positive: {exc}") from exc

    @property
    def total_mass(self) -> float:
        return float(np.trace(self.density).real)

    @property
    def is_faithful(self) -> bool:
        return self.decomposition.support_rank == self.algebra.dim

    def power(self, z: complex) -> np.ndarray:
        """rho^z on the support."""
        return self.decomposition.power(z)

    def powers(self, zs) -> np.ndarray:
        return self.decomposition.powers(zs)

    def __call__(self, x) -> complex:
        return evaluate(self, x)

    def __add__(self, other: "Functional") -> "Functional":
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{other.algebra.blocks} vs {self.algebra.blocks}")
        return replace(self, density=self.density + other.density)

    def __mul__(self, scalar: float) -> "Functional":
        if scalar < 0:
            raise NotPSD("Functionals can only be scaled by non-negative numbers")
        return replace(self, density=float(scalar) * self.density)

    __rmul__ = __mul__

    def conjugate_by(self, a) -> "Functional":
        """a phi a^dagger, i.e. x -> phi(a^dagger x a), density a rho a^dagger."""
        a = a.matrix if isinstance(a, AlgebraElement) else np.asarray(a, dtype=complex)
        return replace(self, density=a @ self.density @ a.conj().T)

    def same_as(self, other: "Functional", tol: float = POWER_TOL) -> bool:
        return (other.algebra == self.algebra
                and float(np.max(np.abs(other.density - self.density))) <= tol)

    def to_dict(self) -> dict:
        return {"blocks": list(self.algebra.blocks),
                "density": [_encode(b) for b in self.algebra.wrap(self.density).blocks]}

    @classmethod
    def from_dict(cls, data: dict, **kwargs) -> "Functional":
        algebra = FiniteAlgebra(tuple(data["blocks"]))
        return cls.from_blocks(algebra, [_decode(b) for b in data["density"]], **kwargs)


@dataclass(frozen=True, eq=False)
class Weight:
    """A finite orthogonal sum of functionals."""

    summands: tuple[Functional, ...]
    tol: float = field(default=POWER_TOL)

    def __post_init__(self):
        summands = tuple(self.summands)
        if not summands:
            raise ValueError("A weight needs at least one summand")
        algebra = summands[0].algebra
        if any(s.algebra != algebra for s in summands):
            raise AlgebraMismatch("Weight summands live in different algebras")
        projections = [s.decomposition.projection() for s in summands]
        for i, p in enumerate(projections):
            for j in range(i + 1, len(projections)):
                overlap = float(np.max(np.abs(p @ projections[j])))
                if overlap > self.tol:
                    raise ValueError(
                        f"Summands {i} and {j} have overlapping supports (|[w_i][w_j]| = {overlap:.2e})"
                    )
        object.__setattr__(self, "summands", summands)

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.summands[0].algebra

    @property
    def support_sum(self) -> np.ndarray:
        return sum(s.decomposition.projection() for s in self.summands)

    @property
    def is_faithful(self) -> bool:
        defect = self.support_sum - np.eye(self.algebra.dim)
        return float(np.max(np.abs(defect))) <= self.tol

    def as_functional(self) -> Functional:
        """The orthogonal sum is itself a normal functional in finite dimensions."""
        return replace(self.summands[0], density=sum(s.density for s in self.summands))


class Majorization(NamedTuple):
    holds: bool
    witness: Optional[AlgebraElement]
    witness_norm: float
    defect: float


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, AlgebraElement) else np.asarray(x, dtype=complex)


def _check_same(phi: Functional, x) -> None:
    algebra = x.algebra if isinstance(x, (AlgebraElement, Functional)) else None
    if algebra is not None and algebra != phi.algebra:
        raise AlgebraMismatch(f"{algebra.blocks} vs {phi.algebra.blocks}")
    if algebra is None and np.shape(x) != (phi.algebra.dim, phi.algebra.dim):
        raise AlgebraMismatch(f"Shape {np.shape(x)} does not match algebra dim {phi.algebra.dim}")


def evaluate(phi: Functional, x) -> complex:
    """phi(x) = sum_k trace(rho_k x_k)."""
    _check_same(phi, x)
    return complex(np.trace(phi.density @ _matrix(x)))


def support(phi: Functional) -> AlgebraElement:
    """The support projection [phi]."""
    return AlgebraElement(phi.algebra, phi.decomposition.projection())


def majorization_witness(phi: Functional, psi: Functional) -> tuple[np.ndarray, float, float]:
    """c = rho_phi^{1/2} rho_psi^{-1/2} with its norm and ||phi^{1/2} - c psi^{1/2}||_hs."""
    _check_same(phi, psi)
    root_phi = phi.power(0.5)
    c = root_phi @ psi.power(-0.5)
    defect = norms(root_phi - c @ psi.power(0.5)).hs
    return c, norms(c).op, defect


def majorization_check(phi: Functional, psi: Functional, tol: float = MAJORIZE_TOL) -> Majorization:
    """phi <= psi iff psi - phi is PSD; the witness c is returned when it holds."""
    _check_same(phi, psi)
    gap = psi.density - phi.density
    lowest = float(np.linalg.eigvalsh(0.5 * (gap + gap.conj().T))[0])
    holds = lowest >= -tol
    c, c_norm, defect = majorization_witness(phi, psi)
    if not holds:
        return Majorization(False, None, c_norm, defect)
    return Majorization(True, AlgebraElement(phi.algebra, c), c_norm, defect)


def witness_holds(result: Majorization, tol: float = MAJORIZE_TOL) -> bool:
    """Condition (iii): ||c|| <= 1 + tol and phi^{1/2} = c psi^{1/2} within tol."""
    return result.witness_norm <= 1.0 + tol and result.defect <= tol


def _encode(block: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(block)]


def _decode(rows: Iterable) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
