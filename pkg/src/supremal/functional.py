"""Supremal and integral functionals, the local functional, and extremum-ball families."""

import logging
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from supremal.grid import (
    GridDomain,
    GridField,
    SubdomainMask,
    ball_mask,
    ess_sup,
    gradient_at,
    interior_extrema,
)
from supremal.grid.extrema import ExtremumKind
from supremal.hamiltonian import HamiltonianSpec
from supremal.utilities.constants import BOUNDARY_TOL, LOCAL_RADIUS_CELLS
from supremal.utilities.errors import (
    BoundaryConditionError,
    ContainmentError,
    ErrorMessages,
    InvalidInputError,
    ParameterError,
)

logger = logging.getLogger(__name__)


def hamiltonian_values(
    H: HamiltonianSpec, u: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """``(indices, H(x, Du(x)))`` over every masked point."""
    if (u.N, u.n) != H.dims:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"field dims ({u.N}, {u.n}) vs H dims {H.dims}"
            )
        )
    if mask.is_empty():
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, mask.label))
    idx = mask.indices()
    grads = gradient_at(u, idx, use_analytic=use_analytic)
    return idx, H.evaluate(u.domain.points_at(idx), grads)


class SupremalValue(BaseModel):
    value: float = Field(description="Grid maximum of H(x, Du(x)) over the mask")
    argmax_index: Tuple[int, ...]
    argmax_point: List[float]
    mask: str = Field(description="Label of the mask used")

    def to_fragment(self) -> Dict[str, Any]:
        return {"e_infty": self.value, "mask": self.mask, "argmax_point": self.argmax_point}


def supremal_value(
    H: HamiltonianSpec, u: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> SupremalValue:
    idx, values = hamiltonian_values(H, u, mask, use_analytic)
    k = int(np.argmax(values))
    index = tuple(int(i) for i in idx[k])
    return SupremalValue(
        value=ess_sup(values),
        argmax_index=index,
        argmax_point=u.domain.point(index).tolist(),
        mask=mask.label,
    )


def e_infty(
    H: HamiltonianSpec, u: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> float:
    """E_inf(u, mask) = max over masked points of H(x, Du(x))."""
    return supremal_value(H, u, mask, use_analytic).value


def e_integral(
    H: HamiltonianSpec, u: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> float:
    """Midpoint-rule integral of H(x, Du(x)) over the mask."""
    _, values = hamiltonian_values(H, u, mask, use_analytic)
    return float(u.domain.cell_volume * values.sum())


class LocalFunctional(BaseModel):
    point: List[float]
    radii: List[float]
    values: List[float] = Field(description="E_inf over each ball, same order as radii")
    monotone: bool = Field(description="Values non-increasing as the radius shrinks")
    extrapolated: Optional[float] = Field(
        default=None, description="Linear extrapolation to radius 0 (an estimate, flagged)"
    )
    is_extrapolated: bool = True


def local_functional(
    H: HamiltonianSpec,
    u: GridField,
    x: Sequence[float],
    radii: Sequence[float],
    parent: Optional[SubdomainMask] = None,
    use_analytic: bool = False,
) -> LocalFunctional:
    """E_inf of u over shrinking balls around ``x``."""
    h = u.domain.h
    rho = [float(r) for r in radii]
    if not rho:
        raise ParameterError("local_functional needs at least one radius")
    if any(a <= b for a, b in zip(rho, rho[1:])):
        raise ParameterError(f"Radii must be strictly decreasing, got {rho}")
    if rho[-1] < LOCAL_RADIUS_CELLS * h - 1e-12:
        raise ParameterError(
            f"Smallest radius {rho[-1]} is below {LOCAL_RADIUS_CELLS}h = {LOCAL_RADIUS_CELLS * h}"
        )
    values = [
        e_infty(H, u, ball_mask(u.domain, x, r, parent=parent), use_analytic) for r in rho
    ]
    monotone = all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    extrapolated = None
    if len(rho) >= 2:
        r1, r2 = rho[-2], rho[-1]
        v1, v2 = values[-2], values[-1]
        estimate = (r1 * v2 - r2 * v1) / (r1 - r2)
        extrapolated = float(min(max(estimate, 0.0), v2))
    return LocalFunctional(
        point=[float(c) for c in x],
        radii=rho,
        values=values,
        monotone=monotone,
        extrapolated=extrapolated,
    )


class RadiusPolicy(BaseModel):
    mode: Literal["maximal", "fixed"] = Field(
        default="maximal", description="Largest admissible radius, or a fixed radius"
    )
    radius: Optional[float] = Field(
        default=None, description="Cap on the radius (the radius itself for mode 'fixed')"
    )
    include_half: bool = Field(
        default=True, description="Also use the half-radius ball at every center"
    )


class Ball(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    center: List[float]
    index: Tuple[int, ...]
    radius: float
    kind: ExtremumKind
    mask: SubdomainMask = Field(exclude=True)


class BallFamily(BaseModel):
    balls: List[Ball]
    parent: str = Field(description="Label of the parent mask")

    @property
    def radii(self) -> List[float]:
        return [b.radius for b in self.balls]


def check_vanishes_on_boundary(
    phi: GridField, mask: SubdomainMask, tol: float = BOUNDARY_TOL
) -> float:
    """Largest |phi| on the unmasked neighbours of the mask; raises above ``tol``."""
    layer = mask.boundary_layer()
    worst = float(np.abs(phi.scalar()[layer]).max()) if layer.any() else 0.0
    if worst > tol:
        raise BoundaryConditionError(
            f"Test function is {worst:.3g} on the boundary of '{mask.label}' (tolerance {tol})"
        )
    return worst


def _fit_radius(
    domain: GridDomain, center: Sequence[float], start_cells: int, parent: SubdomainMask
) -> Optional[Tuple[float, SubdomainMask]]:
    h = domain.h
    for k in range(start_cells, 0, -1):
        try:
            return k * h, ball_mask(domain, center, k * h, parent=parent, depth=parent.depth)
        except ContainmentError:
            continue
    try:
        return 0.5 * h, ball_mask(domain, center, 0.5 * h, parent=parent, depth=parent.depth)
    except ContainmentError:
        return None


def _anchor_center(phi: GridField, mask: SubdomainMask, extremum, anchor) -> Tuple[int, ...]:
    if anchor is None or extremum.plateau_size == 1:
        return extremum.index
    target = phi.domain.index_of(anchor)
    v = phi.scalar()
    if not mask.flags[target] or v[target] != extremum.value:
        return extremum.index
    structure = ndimage.generate_binary_structure(v.ndim, v.ndim)
    labels, _ = ndimage.label(v == extremum.value, structure=structure)
    return target if labels[target] == labels[extremum.index] else extremum.index


def ball_family(
    phi: GridField,
    mask: SubdomainMask,
    policy: Optional[RadiusPolicy] = None,
    anchor: Optional[Sequence[float]] = None,
) -> BallFamily:
    """Balls compactly inside ``mask`` centred at the local extrema of ``phi``.

    Radii are multiples of h. A plateau containing ``anchor`` is centred there
    instead of at its barycentric representative.
    """
    policy = policy or RadiusPolicy()
    check_vanishes_on_boundary(phi, mask)
    domain = phi.domain
    h = domain.h
    depth = ndimage.distance_transform_edt(mask.flags, sampling=h)

    balls: List[Ball] = []
    for extremum in interior_extrema(phi, mask):
        index = _anchor_center(phi, mask, extremum, anchor)
        center = domain.point(index)
        cells = int(np.floor(depth[index] / h + 1e-9))
        if policy.radius is not None:
            cells = min(cells, int(np.floor(policy.radius / h + 1e-9)))
        fitted = _fit_radius(domain, center, cells, mask)
        if fitted is None:
            logger.debug(f"No ball fits around extremum at {center.tolist()}")
            continue
        radius, ball = fitted
        if policy.mode == "fixed" and policy.radius is not None and radius < policy.radius - 1e-12:
            logger.debug(f"Fixed radius {policy.radius} does not fit at {center.tolist()}")
            continue
        radii = [(radius, ball)]
        half_cells = int(np.floor(radius / (2 * h) + 1e-9))
        if policy.include_half and half_cells >= 1 and half_cells * h < radius - 1e-12:
            half = half_cells * h
            radii.append((half, ball_mask(domain, center, half, parent=mask, depth=mask.depth)))
        for r, m in radii:
            balls.append(
                Ball(
                    center=center.tolist(),
                    index=tuple(int(i) for i in index),
                    radius=float(r),
                    kind=extremum.kind,
                    mask=m,
                )
            )

    if not balls:
        raise ContainmentError(
            ErrorMessages.format_error(
                ErrorMessages.NOT_CONTAINED, f"no extremum ball fits inside '{mask.label}'"
            )
        )
    return BallFamily(balls=balls, parent=mask.label)
