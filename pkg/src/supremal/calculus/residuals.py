"""Hamilton-Jacobi and infinity-Laplacian residuals on grid fields."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.functional import hamiltonian_values
from supremal.grid import GridField, SubdomainMask, gradient_at, hessian_at
from supremal.hamiltonian import HamiltonianSpec
from supremal.utilities.constants import RANK_FLAG_FACTOR, SWEEP_CHUNK
from supremal.utilities.errors import ErrorMessages, InvalidInputError, ParameterError

logger = logging.getLogger(__name__)

ResidualKind = Literal["hj", "scalar", "system", "tangential", "normal"]


class ResidualReport(BaseModel):
    kind: str = Field(description="Which residual was evaluated")
    sup: float = Field(ge=0, description="Sup-norm of the residual over the evaluated points")
    worst_index: Optional[Tuple[int, ...]] = None
    worst_point: List[float] = Field(description="Worst offending point")
    h: float = Field(description="Grid spacing used")
    points: int = Field(description="Number of evaluated points")
    flagged: int = Field(
        default=0, description="Points whose gradient sits near a rank change"
    )
    sup_unflagged: Optional[float] = Field(
        default=None, description="Sup-norm over points not near a rank change"
    )
    target: Optional[float] = Field(default=None, description="Level c for the HJ residual")

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        """Associative max reduction of two reports of the same kind."""
        worst = self if self.sup >= other.sup else other
        unflagged = [v for v in (self.sup_unflagged, other.sup_unflagged) if v is not None]
        return worst.model_copy(
            update={
                "points": self.points + other.points,
                "flagged": self.flagged + other.flagged,
                "sup_unflagged": max(unflagged) if unflagged else None,
            }
        )


class ResidualMap(BaseModel):
    """Point cloud of residual norms for external plotting."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray = Field(description="(m, n) evaluation points")
    residual: np.ndarray = Field(description="(m,) residual norms")
    flagged: np.ndarray = Field(description="(m,) near-rank-change flags")

    def to_csv(self) -> str:
        n = self.points.shape[1]
        header = ",".join([f"x{i + 1}" for i in range(n)] + ["residual", "flagged"])
        rows = [header]
        for p, r, f in zip(self.points, self.residual, self.flagged):
            rows.append(",".join([f"{c:.17g}" for c in p] + [f"{r:.17g}", str(int(f))]))
        return "\n".join(rows) + "\n"


def _prefer_analytic(use_analytic: Optional[bool]) -> bool:
    # None means "closures when attached, finite differences otherwise"
    return True if use_analytic is None else use_analytic


def derivatives_at_points(
    u: GridField, points: object, use_analytic: Optional[bool] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """``(Du, D^2u)`` at arbitrary points, shapes ``(m, N, n)`` and ``(m, N, n, n)``.

    Closures are evaluated at the exact points; finite differences use the
    nearest grid index.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[np.newaxis, :]
    analytic = _prefer_analytic(use_analytic)
    if analytic and u.has_gradient and u.has_hessian:
        return (
            np.asarray(u.gradient_fn(pts), dtype=float),  # type: ignore[misc]
            np.asarray(u.hessian_fn(pts), dtype=float),  # type: ignore[misc]
        )
    idx = np.array([u.domain.index_of(p) for p in pts], dtype=int)
    return derivatives_at_indices(u, idx, use_analytic)


def derivatives_at_indices(
    u: GridField, indices: object, use_analytic: Optional[bool] = None
) -> Tuple[np.ndarray, np.ndarray]:
    analytic = _prefer_analytic(use_analytic)
    return (
        gradient_at(u, indices, use_analytic=analytic),
        hessian_at(u, indices, use_analytic=analytic),
    )


def perp_projections(
    grads: np.ndarray, rank_tol: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Projections onto the complement of range(Du) for a stack of gradients.

    Returns ``(perp, margin)`` with ``perp`` of shape ``(m, N, N)`` and, per
    point, the ratio distance from the threshold to the nearest nonzero
    singular value (see ``tensor.rank_margin``).
    """
    if rank_tol is not None and rank_tol < 0:
        raise ParameterError(f"Rank tolerance must be nonnegative, got {rank_tol}")
    m, N, n = grads.shape
    U, sigma, _ = np.linalg.svd(grads, full_matrices=True)
    if rank_tol is None:
        tol = max(N, n) * np.finfo(float).eps * sigma[:, 0]
    else:
        tol = np.full(m, float(rank_tol))
    keep = sigma > tol[:, np.newaxis]
    k = sigma.shape[1]
    basis = U[:, :, :k]
    top = np.einsum("mar,mr,mbr->mab", basis, keep.astype(float), basis)
    perp = np.eye(N) - top
    perp = 0.5 * (perp + np.swapaxes(perp, 1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = tol[:, np.newaxis]
        ratio = np.maximum(sigma / t, t / sigma)
    ratio = np.where((sigma > 0) & (t > 0), ratio, np.inf)
    margin = ratio.min(axis=1)
    return perp, margin


def scalar_part(grads: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Du (x) Du : D^2u for scalar fields, shape ``(m,)``."""
    if grads.shape[1] != 1:
        raise InvalidInputError(f"Scalar infinity-Laplacian needs N=1, got N={grads.shape[1]}")
    g = grads[:, 0, :]
    return np.einsum("mi,mj,mij->m", g, g, hess[:, 0])


def tangential_part(grads: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """(Du (x) Du) : D^2u, shape ``(m, N)``."""
    return np.einsum("mai,mbj,mbij->ma", grads, grads, hess)


def laplacian_part(hess: np.ndarray) -> np.ndarray:
    """Componentwise Laplacian, shape ``(m, N)``."""
    return np.trace(hess, axis1=-2, axis2=-1)


def normal_part(
    grads: np.ndarray, hess: np.ndarray, rank_tol: Optional[float] = None
) -> np.ndarray:
    """|Du|^2 [Du]perp Laplacian(u), shape ``(m, N)``."""
    perp, _ = perp_projections(grads, rank_tol)
    norm2 = np.sum(grads * grads, axis=(1, 2))
    return norm2[:, np.newaxis] * np.einsum("mab,mb->ma", perp, laplacian_part(hess))


def system_part(
    grads: np.ndarray, hess: np.ndarray, rank_tol: Optional[float] = None
) -> np.ndarray:
    """Index form of the infinity-Laplace system with the full coefficient tensor

    A_{a i b j} = Du_{a i} Du_{b j} + |Du|^2 perp_{a b} delta_{i j}.
    """
    perp, _ = perp_projections(grads, rank_tol)
    n = grads.shape[2]
    norm2 = np.sum(grads * grads, axis=(1, 2))
    coeff = np.einsum("mai,mbj->maibj", grads, grads) + np.einsum(
        "m,mab,ij->maibj", norm2, perp, np.eye(n)
    )
    return np.einsum("maibj,mbij->ma", coeff, hess)


def infty_laplacian_scalar(
    u: GridField, x: Sequence[float], use_analytic: Optional[bool] = None
) -> float:
    grads, hess = derivatives_at_points(u, x, use_analytic)
    return float(scalar_part(grads, hess)[0])


def infty_laplacian_system(
    u: GridField,
    x: Sequence[float],
    rank_tol: Optional[float] = None,
    use_analytic: Optional[bool] = None,
) -> np.ndarray:
    grads, hess = derivatives_at_points(u, x, use_analytic)
    return system_part(grads, hess, rank_tol)[0]


def tangential_residual(
    u: GridField, x: Sequence[float], use_analytic: Optional[bool] = None
) -> np.ndarray:
    grads, hess = derivatives_at_points(u, x, use_analytic)
    return tangential_part(grads, hess)[0]


def normal_residual(
    u: GridField,
    x: Sequence[float],
    rank_tol: Optional[float] = None,
    use_analytic: Optional[bool] = None,
) -> np.ndarray:
    grads, hess = derivatives_at_points(u, x, use_analytic)
    return normal_part(grads, hess, rank_tol)[0]


def laplacian(
    u: GridField, x: Sequence[float], use_analytic: Optional[bool] = None
) -> np.ndarray:
    _, hess = derivatives_at_points(u, x, use_analytic)
    return laplacian_part(hess)[0]


def _residual_norms(
    kind: ResidualKind, grads: np.ndarray, hess: np.ndarray, rank_tol: Optional[float]
) -> np.ndarray:
    if kind == "scalar":
        return np.abs(scalar_part(grads, hess))
    if kind == "system":
        values = system_part(grads, hess, rank_tol)
    elif kind == "tangential":
        values = tangential_part(grads, hess)
    elif kind == "normal":
        values = normal_part(grads, hess, rank_tol)
    else:
        raise ParameterError(f"Unknown residual kind '{kind}'")
    return np.linalg.norm(values, axis=-1)


def _report(
    kind: str,
    u: GridField,
    idx: Optional[np.ndarray],
    points: np.ndarray,
    norms: np.ndarray,
    flagged: np.ndarray,
    target: Optional[float] = None,
) -> ResidualReport:
    if norms.size == 0:
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, kind))
    if not np.all(np.isfinite(norms)):
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, kind))
    k = int(np.argmax(norms))
    clean = norms[~flagged]
    return ResidualReport(
        kind=kind,
        sup=float(norms[k]),
        worst_index=tuple(int(i) for i in idx[k]) if idx is not None else None,
        worst_point=points[k].tolist(),
        h=u.domain.h,
        points=int(norms.size),
        flagged=int(np.count_nonzero(flagged)),
        sup_unflagged=float(clean.max()) if clean.size else None,
        target=target,
    )


def hj_residual(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    c: float,
    use_analytic: Optional[bool] = None,
) -> ResidualReport:
    """sup over the mask of |H(x, Du(x)) - c|."""
    if c < 0:
        raise ParameterError(f"Level c must be nonnegative, got {c}")
    idx, values = hamiltonian_values(H, u, mask, _prefer_analytic(use_analytic))
    norms = np.abs(values - c)
    return _report(
        "hj", u, idx, u.domain.points_at(idx), norms, np.zeros(norms.size, dtype=bool), c
    )


def residual_sweep(
    u: GridField,
    mask: SubdomainMask,
    kind: ResidualKind = "system",
    rank_tol: Optional[float] = None,
    use_analytic: Optional[bool] = None,
    workers: Optional[int] = None,
) -> Tuple[ResidualReport, ResidualMap]:
    """Residual norms at every masked point, with near-rank-change points flagged.

    Chunks are reduced with an associative max, so the report does not depend
    on ``workers``.
    """
    if mask.is_empty():
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, mask.label))
    idx = mask.indices()
    bounds = list(range(0, idx.shape[0], SWEEP_CHUNK)) + [idx.shape[0]]

    def run_chunk(k: int) -> Tuple[np.ndarray, np.ndarray]:
        part = idx[bounds[k] : bounds[k + 1]]
        grads, hess = derivatives_at_indices(u, part, use_analytic)
        _, margin = perp_projections(grads, rank_tol)
        return _residual_norms(kind, grads, hess, rank_tol), margin <= RANK_FLAG_FACTOR

    chunks = range(len(bounds) - 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, chunks))
    else:
        results = [run_chunk(k) for k in chunks]

    norms = np.concatenate([r[0] for r in results])
    flagged = np.concatenate([r[1] for r in results])
    points = u.domain.points_at(idx)
    report = _report(kind, u, idx, points, norms, flagged)
    if report.flagged:
        logger.info(f"{report.flagged} of {report.points} points flagged near a rank change")
    return report, ResidualMap(points=points, residual=norms, flagged=flagged)


def residual_at_points(
    u: GridField,
    points: object,
    kind: ResidualKind = "system",
    rank_tol: Optional[float] = None,
    use_analytic: Optional[bool] = None,
) -> ResidualReport:
    """Same as ``residual_sweep`` on an explicit point set (nearest grid points for FD)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    grads, hess = derivatives_at_points(u, pts, use_analytic)
    _, margin = perp_projections(grads, rank_tol)
    norms = _residual_norms(kind, grads, hess, rank_tol)
    return _report(kind, u, None, pts, norms, margin <= RANK_FLAG_FACTOR)


def observed_order(hs: Sequence[float], sups: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log sup against log h; None without two positive samples."""
    h = np.asarray(hs, dtype=float)
    s = np.asarray(sups, dtype=float)
    if h.size != s.size:
        raise InvalidInputError(f"{h.size} spacings for {s.size} residuals")
    if h.size < 2 or np.any(s <= 0) or np.unique(h).size < 2:
        return None
    return float(np.polyfit(np.log(h), np.log(s), 1)[0])
