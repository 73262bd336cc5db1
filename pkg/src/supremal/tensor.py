"""Small dense matrix algebra: ranks, singular values and orthogonal projections."""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.utilities.constants import PROJECTION_TOL, RANK_FLAG_FACTOR, UNIT_TOL
from supremal.utilities.errors import ErrorMessages, InvalidInputError

logger = logging.getLogger(__name__)

Mat = np.ndarray


def as_matrix(M: object, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array, raising InvalidInputError otherwise."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or 0 in arr.shape:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"{name} shape {arr.shape}")
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, name))
    return arr


def default_rank_tol(M: np.ndarray, sigma_max: Optional[float] = None) -> float:
    if sigma_max is None:
        sigma_max = float(np.linalg.norm(M, 2)) if M.size else 0.0
    return max(M.shape) * np.finfo(float).eps * sigma_max


def singular_values(M: Mat) -> np.ndarray:
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def rank(M: Mat, tol: Optional[float] = None) -> int:
    """Number of singular values strictly above ``tol``.

    The default threshold is ``max(N, n) * eps * sigma_max``.
    """
    arr = as_matrix(M)
    if tol is not None and tol < 0:
        raise InvalidInputError(f"Rank tolerance must be nonnegative, got {tol}")
    sigma = singular_values(arr)
    if tol is None:
        tol = default_rank_tol(arr, float(sigma[0]) if sigma.size else 0.0)
    return int(np.count_nonzero(sigma > tol))


def rank_margin(M: Mat, tol: Optional[float] = None) -> float:
    """Ratio distance from the rank threshold to the nearest nonzero singular value.

    A singular value on either side of ``tol`` counts, so both a retained value
    just above it and a dropped value just below it give a small margin.
    Returns ``inf`` when every singular value is zero or the threshold is zero.
    Values at or below ``RANK_FLAG_FACTOR`` mark points near a rank change.
    """
    arr = as_matrix(M)
    sigma = singular_values(arr)
    if tol is None:
        tol = default_rank_tol(arr, float(sigma[0]) if sigma.size else 0.0)
    nonzero = sigma[sigma > 0]
    if nonzero.size == 0 or tol == 0:
        return float("inf")
    return float(np.min(np.maximum(nonzero / tol, tol / nonzero)))


def near_rank_change(M: Mat, tol: Optional[float] = None) -> bool:
    return rank_margin(M, tol) <= RANK_FLAG_FACTOR


def range_perp_projection(M: Mat, tol: Optional[float] = None) -> np.ndarray:
    """Orthogonal projection of R^N onto the complement of the column space of M."""
    arr = as_matrix(M)
    U, sigma, _ = np.linalg.svd(arr, full_matrices=True)
    if tol is None:
        tol = default_rank_tol(arr, float(sigma[0]) if sigma.size else 0.0)
    r = int(np.count_nonzero(sigma > tol))
    N = arr.shape[0]
    basis = U[:, :r]
    P = np.eye(N) - basis @ basis.T
    return 0.5 * (P + P.T)


def outer(xi: object, eta: object) -> np.ndarray:
    return np.multiply.outer(
        np.asarray(xi, dtype=float).ravel(), np.asarray(eta, dtype=float).ravel()
    )


def frobenius_norm(M: object) -> np.ndarray:
    """Frobenius norm over the last two axes (vectorised)."""
    arr = np.asarray(M, dtype=float)
    return np.sqrt(np.sum(arr * arr, axis=(-2, -1)))


class ProjectionPair(BaseModel):
    """Projections onto span[xi] and its orthogonal complement."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    top: np.ndarray = Field(description="xi (x) xi, projection onto span[xi]")
    perp: np.ndarray = Field(description="I - xi (x) xi")
    xi: np.ndarray = Field(description="The unit direction actually used")
    rescale: float = Field(
        default=1.0, description="Norm of the input direction before normalisation"
    )

    def check(self, tol: float = PROJECTION_TOL) -> bool:
        N = self.top.shape[0]
        norm = max(1.0, float(np.linalg.norm(self.top)))
        return bool(
            np.linalg.norm(self.top @ self.top - self.top) <= tol * norm
            and np.linalg.norm(self.perp @ self.perp - self.perp) <= tol * norm
            and np.allclose(self.top + self.perp, np.eye(N), atol=tol)
            and np.linalg.norm(self.top @ self.perp) <= tol * norm
        )


def unit_vector(xi: object) -> tuple[np.ndarray, float]:
    vec = np.asarray(xi, dtype=float).ravel()
    if vec.size == 0 or not np.all(np.isfinite(vec)):
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, "xi"))
    length = float(np.linalg.norm(vec))
    if length == 0.0:
        raise InvalidInputError("Direction xi must be nonzero")
    if abs(length - 1.0) > UNIT_TOL:
        logger.debug(f"Normalising direction of length {length}")
        return vec / length, length
    return vec, 1.0


def dir_projections(xi: object) -> ProjectionPair:
    unit, length = unit_vector(xi)
    top = np.outer(unit, unit)
    perp = np.eye(unit.size) - top
    return ProjectionPair(top=top, perp=perp, xi=unit, rescale=length)
