"""Small dense complex linear algebra.

Everything here works on ``complex128`` arrays of dimension ``M`` up to a
few dozen; the leakage matrices handled by the per-user solvers are
Hermitian positive semidefinite, so only the Hermitian eigenproblem is
needed.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import RankError, ValidationError

__all__ = [
    "EigenDecomposition",
    "eig_hermitian",
    "numerical_rank",
    "inv_sqrt",
    "project_onto_range",
    "project_onto_null",
    "HERMITIAN_ATOL",
    "RANK_RTOL",
]

HERMITIAN_ATOL = 1e-12
RANK_RTOL = 1e-10


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching unitary eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def rank(self) -> int:
        return numerical_rank(self.eigenvalues)


def _check_hermitian(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    # absolute 1e-12 on unit-scale matrices, scaled with the largest entry
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.max(np.abs(a - a.conj().T), initial=0.0) > HERMITIAN_ATOL * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return a


def numerical_rank(eigenvalues) -> int:
    """Count eigenvalues above ``1e-10 * max(lambda_max, 1)``."""
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size == 0:
        return 0
    cutoff = RANK_RTOL * max(float(ev.max()), 1.0)
    return int(np.count_nonzero(ev > cutoff))


def eig_hermitian(a) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Raises
    ------
    ValidationError
        If ``a`` is not square, not finite, or not Hermitian within tolerance.
    """
    a = _check_hermitian(a)
    # LAPACK zheevd on the symmetrised input; ascending order from eigh
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def inv_sqrt(a, decomp: EigenDecomposition | None = None) -> np.ndarray:
    """Inverse principal square root ``R`` with ``R @ a @ R = I``.

    Raises
    ------
    RankError
        If the smallest eigenvalue does not clear the rank threshold.
    """
    if decomp is None:
        decomp = eig_hermitian(a)
    lam, u = decomp
    if numerical_rank(lam) < lam.size:
        raise RankError("matrix is singular or indefinite; no inverse square root")
    r = (u * (1.0 / np.sqrt(lam))) @ u.conj().T
    return 0.5 * (r + r.conj().T)


def _range_basis(decomp: EigenDecomposition, rank: int) -> np.ndarray:
    m = decomp.eigenvectors.shape[0]
    if not 0 <= rank <= m:
        raise ValidationError(f"rank must lie in [0, {m}], got {rank}")
    return decomp.eigenvectors[:, :rank]


def project_onto_range(decomp: EigenDecomposition, rank: int, v) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the span of the leading ``rank`` eigenvectors."""
    u1 = _range_basis(decomp, rank)
    v = np.asarray(v, dtype=np.complex128)
    return u1 @ (u1.conj().T @ v)


def project_onto_null(decomp: EigenDecomposition, rank: int, v) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the complement of :func:`project_onto_range`."""
    v = np.asarray(v, dtype=np.complex128)
    return v - project_onto_range(decomp, rank, v)
