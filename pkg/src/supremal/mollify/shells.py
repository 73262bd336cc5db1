"""Nested shells, rings and the partition of unity subordinate to them."""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from supremal.grid import GridDomain, SubdomainMask
from supremal.mollify.kernel import MollifierKernel
from supremal.utilities.constants import MIN_RING_CELLS, WEIGHT_SUM_TOL
from supremal.utilities.errors import (
    ErrorMessages,
    InvalidInputError,
    ParameterError,
    ResolutionError,
)

logger = logging.getLogger(__name__)


class ShellDecomposition(BaseModel):
    """Shells {dist > d0 / k} of the working mask and their rings.

    ``rings[k - 1]`` is V_k = Omega_k minus Omega_{k-1}. When the shell count
    is capped before the shells reach the boundary layer, the uncovered
    collar is absorbed into the last ring and ``truncated`` is set.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    domain: GridDomain
    mask: SubdomainMask
    d0: float = Field(gt=0)
    K: int = Field(ge=1, description="Number of shells")
    distance: np.ndarray = Field(description="Distance to the unmasked set, zero outside")
    shells: List[np.ndarray] = Field(description="Omega_1 .. Omega_K as boolean arrays")
    rings: List[np.ndarray] = Field(description="V_1 .. V_K as boolean arrays")
    widths: List[float] = Field(description="Width of each ring")
    truncated: bool = Field(default=False, description="Collar absorbed into V_K")
    collar_points: int = Field(default=0)
    max_shells: Optional[int] = Field(default=None, description="Cap requested by the caller")

    def labels(self) -> np.ndarray:
        """Ring number per grid point, 0 outside the mask."""
        out = np.zeros(self.mask.shape, dtype=int)
        for k, ring in enumerate(self.rings, start=1):
            out[ring] = k
        return out

    def allowed_support(self, k: int) -> np.ndarray:
        """V_{k-1} | V_k | V_{k+1} for 1 <= k <= K."""
        lo, hi = max(k - 1, 1), min(k + 1, self.K)
        out = np.zeros(self.mask.shape, dtype=bool)
        for j in range(lo, hi + 1):
            out |= self.rings[j - 1]
        return out

    def summary(self) -> dict:
        return {
            "d0": self.d0,
            "K": self.K,
            "max_shells": self.max_shells,
            "truncated": self.truncated,
            "collar_points": self.collar_points,
            "ring_points": [int(r.sum()) for r in self.rings],
            "ring_widths": self.widths,
        }


def mask_distance(domain: GridDomain, mask: SubdomainMask) -> np.ndarray:
    return ndimage.distance_transform_edt(mask.flags, sampling=domain.h)


def inradius(domain: GridDomain, mask: SubdomainMask) -> float:
    if mask.is_empty():
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, mask.label))
    return float(mask_distance(domain, mask).max())


def _resolved_count(d0: float, h: float) -> int:
    # rings k >= 2 have width d0 / (k (k - 1)); keep every one at least two cells wide
    limit = d0 / (MIN_RING_CELLS * h)
    K = 1
    while (K + 1) * K <= limit * (1 + 1e-12):
        K += 1
    return K


def build_shells(
    domain: GridDomain,
    mask: SubdomainMask,
    d0: Optional[float] = None,
    max_shells: Optional[int] = None,
    finest_radius: Optional[float] = None,
) -> ShellDecomposition:
    """Shells Omega_k = {x in mask : dist(x, boundary) > d0 / k}.

    ``d0`` defaults to a third of the inradius. K is the smallest count whose
    last shell holds every masked point, capped so that every ring stays
    resolved, by ``max_shells``, and so that ``finest_radius / K`` keeps two
    cells.
    """
    if mask.shape != domain.shape:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"mask {mask.shape} on {domain.shape}"
            )
        )
    distance = mask_distance(domain, mask)
    deepest = float(distance.max()) if mask.count else 0.0
    if d0 is None:
        d0 = deepest / 3.0
    if not d0 > 0:
        raise ParameterError(f"d0 must be positive, got {d0}")
    if deepest <= d0:
        raise ParameterError(
            f"Omega_1 is empty: d0={d0} is not below the inradius {deepest} of '{mask.label}'"
        )
    if max_shells is not None and max_shells < 1:
        raise ParameterError(f"max_shells must be at least 1, got {max_shells}")

    h = domain.h
    covering = int(np.floor(d0 / h)) + 1
    K = min(covering, _resolved_count(d0, h))
    if max_shells is not None:
        K = min(K, max_shells)
    if finest_radius is not None:
        K = max(1, min(K, int(np.floor(finest_radius / (MIN_RING_CELLS * h) * (1 + 1e-12)))))

    shells = [mask.flags & (distance > d0 / k) for k in range(1, K + 1)]
    rings = [shells[0]] + [shells[k] & ~shells[k - 1] for k in range(1, K)]
    collar = mask.flags & ~shells[-1]
    rings[-1] = rings[-1] | collar

    widths = [deepest - d0]
    widths += [d0 / (k - 1) - d0 / k for k in range(2, K + 1)]
    if collar.any():
        widths[-1] = d0 / (K - 1) if K > 1 else deepest

    result = ShellDecomposition(
        domain=domain,
        mask=mask,
        d0=float(d0),
        K=K,
        distance=distance,
        shells=shells,
        rings=rings,
        widths=[float(w) for w in widths],
        truncated=bool(collar.any()),
        collar_points=int(collar.sum()),
        max_shells=max_shells,
    )
    logger.debug(f"Built {K} shells over '{mask.label}': {result.summary()}")
    return result


class PartitionOfUnity(BaseModel):
    """Weights zeta_k >= 0 summing to one on the mask, zero outside it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: np.ndarray = Field(description="Shape (K, *grid shape)")
    radius: float = Field(description="Radius used to mollify the ring indicators")

    @property
    def K(self) -> int:
        return int(self.weights.shape[0])

    def total(self) -> np.ndarray:
        return self.weights.sum(axis=0)


def build_partition(shells: ShellDecomposition) -> PartitionOfUnity:
    """Mollified ring indicators, clipped to three neighbouring rings and rescaled."""
    h = shells.domain.h
    thinnest = min(shells.widths)
    if thinnest < MIN_RING_CELLS * h * (1 - 1e-9):
        raise ResolutionError(
            f"Ring of width {thinnest} is thinner than {MIN_RING_CELLS} cells of size {h}"
        )
    flags = shells.mask.flags
    K = shells.K
    if K == 1:
        return PartitionOfUnity(weights=flags[np.newaxis].astype(float), radius=0.0)

    radius = 0.25 * thinnest
    kernel = MollifierKernel(radius=radius, h=h, dim=shells.domain.dim)
    raw = np.zeros((K,) + flags.shape)
    for k in range(1, K + 1):
        smoothed = kernel.apply(shells.rings[k - 1].astype(float), padding="zero")
        raw[k - 1] = np.where(shells.allowed_support(k), np.clip(smoothed, 0.0, None), 0.0)

    total = raw.sum(axis=0)
    if np.any(total[flags] <= 0):
        raise ResolutionError("Partition weights vanish at a masked point")
    weights = np.zeros_like(raw)
    weights[:, flags] = raw[:, flags] / total[flags]

    drift = float(np.max(np.abs(weights.sum(axis=0)[flags] - 1.0)))
    if drift > WEIGHT_SUM_TOL:
        raise ResolutionError(f"Partition sums deviate from one by {drift}")
    return PartitionOfUnity(weights=weights, radius=float(radius))
