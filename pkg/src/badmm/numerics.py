"""Dense linear-algebra kernel shared by the whole package.

Provides validated array conversion, a reusable SPD (Cholesky) factorization,
and extremal eigenvalues / singular values of small dense matrices. Matrices
here are plain ``numpy`` float64 arrays; problem sizes stay around 1024^2 or
below, so dense LAPACK routines are used throughout.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidParameter, NoConvergence, NotSpd

# Default tolerances; override per call where a different one is needed.
SPD_ASYMMETRY_TOL = 1e-12
FACTOR_RESIDUAL_TOL = 1e-10


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-d float64 array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameter(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    return arr


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-d float64 array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise InvalidParameter(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    return arr


def _require_symmetric(M: np.ndarray, tol: float, name: str) -> np.ndarray:
    if M.shape[0] != M.shape[1]:
        raise InvalidParameter(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, float(np.linalg.norm(M)))
    if float(np.linalg.norm(M - M.T)) > tol * scale:
        raise InvalidParameter(f"{name} is not symmetric within relative tolerance {tol}")
    return M


class SpdFactorization:
    """Cholesky factorization of an SPD matrix, reusable for many solves.

    The factor is computed once; :meth:`solve` then costs two triangular
    back-substitutions per right-hand side.
    """

    def __init__(self, matrix) -> None:
        M = _require_symmetric(as_matrix(matrix, "SPD matrix"), SPD_ASYMMETRY_TOL, "SPD matrix")
        try:
            self._cho = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotSpd(f"matrix is not positive definite: {exc}") from exc
        self.dimension = M.shape[0]

    def solve(self, v) -> np.ndarray:
        """Return u with M u = v."""
        rhs = as_vector(v, "right-hand side")
        if rhs.shape[0] != self.dimension:
            raise InvalidParameter(
                f"right-hand side has length {rhs.shape[0]}, expected {self.dimension}"
            )
        return scipy.linalg.cho_solve(self._cho, rhs, check_finite=False)

    @property
    def lower_factor(self) -> np.ndarray:
        """Lower-triangular L with L L^T equal to the factored matrix."""
        return np.tril(self._cho[0])


def spd_factor(M) -> SpdFactorization:
    """Factor a symmetric positive definite matrix for repeated solves.

    Raises :class:`NotSpd` when the matrix has a nonpositive pivot and
    :class:`InvalidParameter` when it is not square/symmetric/finite.
    """
    return SpdFactorization(M)


def min_eig_symmetric(M) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    A = _require_symmetric(as_matrix(M, "symmetric matrix"), SPD_ASYMMETRY_TOL, "symmetric matrix")
    try:
        return float(np.linalg.eigvalsh(A)[0])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"symmetric eigensolver failed: {exc}") from exc


def max_eig_symmetric(M) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    A = _require_symmetric(as_matrix(M, "symmetric matrix"), SPD_ASYMMETRY_TOL, "symmetric matrix")
    try:
        return float(np.linalg.eigvalsh(A)[-1])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"symmetric eigensolver failed: {exc}") from exc


def spectral_norm(M) -> float:
    """Largest singular value of an arbitrary dense matrix."""
    A = as_matrix(M, "matrix")
    try:
        return float(np.linalg.svd(A, compute_uv=False)[0])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"singular value computation failed: {exc}") from exc
