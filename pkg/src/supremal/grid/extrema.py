import logging
from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import ndimage

from supremal.grid.domain import SubdomainMask
from supremal.grid.field import GridField
from supremal.utilities.errors import InvalidInputError

logger = logging.getLogger(__name__)

ExtremumKind = Literal["max", "min", "both"]


class Extremum(BaseModel):
    index: Tuple[int, ...] = Field(description="Grid index of the representative point")
    point: List[float] = Field(description="Coordinates of the representative point")
    kind: ExtremumKind
    value: float
    plateau_size: int = Field(default=1, description="Points in the tied plateau")

    def matches(self, kind: ExtremumKind) -> bool:
        return self.kind == kind or "both" in (self.kind, kind)


def _neighbour_views(padded: np.ndarray, shape: Tuple[int, ...], offset) -> np.ndarray:
    return padded[tuple(slice(1 + o, 1 + o + k) for o, k in zip(offset, shape))]


def _valid_components(
    v: np.ndarray, candidates: np.ndarray, offsets: List[Tuple[int, ...]]
) -> Tuple[np.ndarray, List[int]]:
    """Label candidate components; keep those with no equal-valued neighbour outside."""
    structure = ndimage.generate_binary_structure(v.ndim, v.ndim)
    labels, count = ndimage.label(candidates, structure=structure)
    if count == 0:
        return labels, []
    padded_v = np.pad(v, 1, constant_values=np.nan)
    padded_c = np.pad(candidates, 1, constant_values=False)
    leaking = np.zeros(v.shape, dtype=bool)
    for offset in offsets:
        nv = _neighbour_views(padded_v, v.shape, offset)
        nc = _neighbour_views(padded_c, v.shape, offset)
        leaking |= candidates & ~nc & (nv == v)
    bad = set(np.unique(labels[leaking]).tolist())
    return labels, [k for k in range(1, count + 1) if k not in bad]


def interior_extrema(phi: GridField, mask: SubdomainMask) -> List[Extremum]:
    """Local extrema of a scalar field inside ``mask``, ties grouped into plateaus.

    A point is a candidate maximum when it is >= all of its 3^n - 1 grid
    neighbours. Connected candidate sets form plateaus; a plateau counts only
    if no equal-valued neighbour lies outside it and it stays inside the mask,
    so the zero plateau around a compactly supported bump is not reported.
    Each plateau contributes the point nearest its barycentre. A constant
    field is one plateau of kind ``both`` represented by the mask point
    farthest from the mask boundary.
    """
    v = phi.scalar()
    if mask.shape != v.shape:
        raise InvalidInputError(f"Mask shape {mask.shape} does not match field {v.shape}")
    if mask.is_empty():
        raise InvalidInputError(f"Mask '{mask.label}' is empty")

    offsets = list(phi.domain.neighbour_offsets())
    up = np.pad(v, 1, constant_values=-np.inf)
    down = np.pad(v, 1, constant_values=np.inf)
    is_max = np.ones(v.shape, dtype=bool)
    is_min = np.ones(v.shape, dtype=bool)
    for offset in offsets:
        is_max &= v >= _neighbour_views(up, v.shape, offset)
        is_min &= v <= _neighbour_views(down, v.shape, offset)

    found: List[Extremum] = []
    if np.ptp(v) == 0:
        return [_deepest(phi, mask)]

    for candidates, kind in ((is_max, "max"), (is_min, "min")):
        labels, valid = _valid_components(v, candidates, offsets)
        for k in valid:
            component = labels == k
            if np.any(component & ~mask.flags):
                continue
            found.append(_representative(phi, component, component, kind))

    found.sort(key=lambda e: e.index)
    logger.debug(f"Found {len(found)} extrema of '{phi.name}' in '{mask.label}'")
    return found


def _representative(
    phi: GridField, eligible: np.ndarray, component: np.ndarray, kind: str
) -> Extremum:
    members = np.argwhere(component)
    centre = members.mean(axis=0)
    options = np.argwhere(eligible)
    best = options[np.argmin(np.linalg.norm(options - centre, axis=1))]
    index = tuple(int(i) for i in best)
    return Extremum(
        index=index,
        point=phi.domain.point(index).tolist(),
        kind=kind,  # type: ignore[arg-type]
        value=float(phi.values[index][0]),
        plateau_size=int(members.shape[0]),
    )


def _deepest(phi: GridField, mask: SubdomainMask) -> Extremum:
    depth = ndimage.distance_transform_edt(mask.flags)
    index = tuple(int(i) for i in np.unravel_index(int(np.argmax(depth)), depth.shape))
    return Extremum(
        index=index,
        point=phi.domain.point(index).tolist(),
        kind="both",
        value=float(phi.values[index][0]),
        plateau_size=int(np.prod(depth.shape)),
    )
