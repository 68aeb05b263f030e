"""
Dense complex matrix substrate.

Hermitian spectral calculus on small blocks: eigendecomposition with a support
rank, complex powers taken on the support only (zero eigenvalues map to zero),
and the operator / Hilbert-Schmidt / trace norms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.linalg

from modtrace.errors import NotHermitian, NotPSD, NumericalFailure

logger = logging.getLogger("modtrace.calculus.matrix")

HERMITIAN_TOL = 1e-10
RECONSTRUCT_TOL = 1e-10
POWER_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12


class Norms(NamedTuple):
    op: float
    hs: float
    trace: float


def as_block(entries) -> np.ndarray:
    """Coerce ``entries`` to a non-empty square complex array."""
    block = np.asarray(entries, dtype=complex)
    if block.ndim != 2 or block.shape[0] != block.shape[1] or block.shape[0] == 0:
        raise ValueError(f"Expected a non-empty square matrix, got shape {block.shape}")
    return block


def hermitian_defect(block: np.ndarray) -> float:
    """max |A_ij - conj(A_ji)|."""
    return float(np.max(np.abs(block - block.conj().T)))


def _scale(block: np.ndarray) -> float:
    # tolerances are absolute on unit-scale input
    return max(1.0, float(np.max(np.abs(block))))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-data of a Hermitian block, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support_rank: int
    support_cutoff: float = SUPPORT_CUTOFF

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @cached_property
    def support_mask(self) -> np.ndarray:
        top = self.eigenvalues[-1] if self.dim else 0.0
        if top <= 0:
            return np.zeros(self.dim, dtype=bool)
        return self.eigenvalues > self.support_cutoff * top

    @cached_property
    def _support_basis(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.support_mask
        return self.eigenvectors[:, mask], np.log(self.eigenvalues[mask])

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, fn) -> np.ndarray:
        """Functional calculus on the support: U diag(fn(lambda_j)) U^dagger."""
        u, logs = self._support_basis
        return (u * fn(np.exp(logs))) @ u.conj().T

    def powers(self, exponents) -> np.ndarray:
        """Stack of A^w for every w in ``exponents`` (support only).

        The result has shape ``np.shape(exponents) + (n, n)``.
        """
        u, logs = self._support_basis
        phases = np.exp(np.multiply.outer(np.asarray(exponents, dtype=complex), logs))
        return np.einsum("ij,...j,kj->...ik", u, phases, u.conj())

    def power(self, exponent: complex) -> np.ndarray:
        return self.powers(complex(exponent))

    def projection(self) -> np.ndarray:
        """Support projection, i.e. A^0."""
        return self.power(0.0)


def eigh(block, hermitian_tol: float = HERMITIAN_TOL,
         reconstruct_tol: float = RECONSTRUCT_TOL,
         support_cutoff: float = SUPPORT_CUTOFF) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian block."""
    block = as_block(block)
    defect = hermitian_defect(block)
    scale = _scale(block)
    if defect > hermitian_tol * scale:
        raise NotHermitian(f"Block is not Hermitian: defect {defect:.3e} > {hermitian_tol:.1e}")

    sym = 0.5 * (block + block.conj().T)
    try:
        values, vectors = scipy.linalg.eigh(sym)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Eigensolver failed: {exc}") from exc

    top = values[-1]
    rank = int(np.count_nonzero(values > support_cutoff * top)) if top > 0 else 0
    decomposition = SpectralDecomposition(values, vectors, rank, support_cutoff)

    error = float(np.linalg.norm(decomposition.reconstruct() - sym, ord=2))
    if error > reconstruct_tol * scale:
        raise NumericalFailure(f"Reconstruction error {error:.3e} exceeds {reconstruct_tol:.1e}")
    return decomposition


def psd_decomposition(rho, support_cutoff: float = SUPPORT_CUTOFF,
                      hermitian_tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    """eigh plus the positivity check used by every complex power."""
    decomposition = eigh(rho, hermitian_tol=hermitian_tol, support_cutoff=support_cutoff)
    values = decomposition.eigenvalues
    scale = float(np.max(np.abs(values)))
    if values[0] < -support_cutoff * scale:
        raise NotPSD(f"Density has negative eigenvalue {values[0]:.3e}")
    return decomposition


def complex_power(rho, z: complex, support_cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """rho^z on the support of the PSD block ``rho``; kernel maps to 0."""
    return psd_decomposition(rho, support_cutoff=support_cutoff).power(z)


def norms(block) -> Norms:
    """Operator, Hilbert-Schmidt and trace norms from the singular values."""
    block = as_block(block)
    try:
        sigma = scipy.linalg.svdvals(block)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    return Norms(op=float(sigma[0]), hs=float(np.sqrt(np.sum(sigma ** 2))),
                 trace=float(np.sum(sigma)))


def op_norms(stack: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of matrices (last two axes)."""
    if stack.shape[-1] == 0:
        return np.zeros(stack.shape[:-2])
    return np.linalg.norm(stack, ord=2, axis=(-2, -1))
