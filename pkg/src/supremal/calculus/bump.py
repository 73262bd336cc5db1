"""Compactly supported bumps and rank-one variations ``u + xi * phi``."""

import logging
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from supremal.grid import GridDomain, GridField, SubdomainMask, ball_mask
from supremal.tensor import unit_vector
from supremal.utilities.errors import ErrorMessages, InvalidInputError

logger = logging.getLogger(__name__)

BumpProfile = Literal["quintic", "cosine"]

# cos(pi s) - sinc(s) over s^2 tends to -pi^2 / 3 at the center
_SERIES_CUTOFF = 1e-4


class BumpSpec(BaseModel):
    """Radial bump supported on the closed ball of radius ``radius`` around ``center``.

    ``quintic`` is a(1 - s^2)^3 (C^2 at the seam), ``cosine`` is a(1 + cos pi s)/2
    (C^1 at the seam), with s = |x - center| / radius.
    """

    center: List[float] = Field(description="Center of the support ball")
    radius: float = Field(gt=0, description="Support radius")
    amplitude: float = Field(default=1.0, description="Peak magnitude")
    profile: BumpProfile = Field(default="quintic")
    sign: Literal[1, -1] = Field(
        default=1, description="Maximum (+1) or minimum (-1) at the center"
    )

    @field_validator("center")
    @classmethod
    def check_center(cls, v: List[float]) -> List[float]:
        if not v or not all(np.isfinite(v)):
            raise ValueError("Bump center must be a non-empty finite vector")
        return [float(c) for c in v]

    @property
    def scale(self) -> float:
        return self.sign * self.amplitude

    def _offsets(self, x: np.ndarray) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if pts.shape[-1] != len(self.center):
            raise InvalidInputError(
                ErrorMessages.format_error(
                    ErrorMessages.DIMENSION, f"points {pts.shape} vs center {len(self.center)}"
                )
            )
        return pts - np.asarray(self.center)

    def value(self, x: np.ndarray) -> np.ndarray:
        """Profile values, shape ``x.shape[:-1]``."""
        d = self._offsets(x)
        s2 = np.sum(d * d, axis=-1) / self.radius**2
        inside = s2 < 1.0
        if self.profile == "quintic":
            out = self.scale * (1.0 - s2) ** 3
        else:
            out = 0.5 * self.scale * (1.0 + np.cos(np.pi * np.sqrt(s2)))
        return np.where(inside, out, 0.0)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradients, shape ``(*x.shape[:-1], n)``."""
        d = self._offsets(x)
        r2 = self.radius**2
        s2 = np.sum(d * d, axis=-1) / r2
        inside = (s2 < 1.0)[..., np.newaxis]
        if self.profile == "quintic":
            factor = -6.0 * self.scale * (1.0 - s2) ** 2 / r2
        else:
            factor = -0.5 * self.scale * np.pi**2 / r2 * np.sinc(np.sqrt(s2))
        return np.where(inside, factor[..., np.newaxis] * d, 0.0)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """Hessians, shape ``(*x.shape[:-1], n, n)``."""
        d = self._offsets(x)
        n = d.shape[-1]
        r2 = self.radius**2
        s2 = np.sum(d * d, axis=-1) / r2
        inside = (s2 < 1.0)[..., np.newaxis, np.newaxis]
        ddt = d[..., :, np.newaxis] * d[..., np.newaxis, :]
        eye = np.eye(n)
        if self.profile == "quintic":
            t = 1.0 - s2
            lead = (-6.0 * self.scale / r2 * t)[..., np.newaxis, np.newaxis]
            out = lead * (t[..., np.newaxis, np.newaxis] * eye - 4.0 * ddt / r2)
        else:
            s = np.sqrt(s2)
            c = -0.5 * self.scale * np.pi**2 / r2
            safe = np.where(s < _SERIES_CUTOFF, 1.0, s)
            ratio = np.where(
                s < _SERIES_CUTOFF,
                -np.pi**2 / 3.0,
                (np.cos(np.pi * safe) - np.sinc(safe)) / safe**2,
            )
            out = c * (
                np.sinc(s)[..., np.newaxis, np.newaxis] * eye
                + (ratio / r2)[..., np.newaxis, np.newaxis] * ddt
            )
        return np.where(inside, out, 0.0)


def _support_check(domain: GridDomain, spec: BumpSpec, mask: Optional[SubdomainMask]) -> None:
    # raises ContainmentError unless the support and its stencil neighbours stay inside
    ball_mask(domain, spec.center, spec.radius, parent=mask, depth=mask.depth if mask else 1)


def make_bumps(
    specs: Sequence[BumpSpec],
    domain: GridDomain,
    mask: Optional[SubdomainMask] = None,
    name: str = "bump",
) -> GridField:
    """Sum of bumps as a scalar field with analytic gradient and Hessian closures."""
    specs = list(specs)
    if not specs:
        raise InvalidInputError("At least one bump is required")
    for spec in specs:
        if len(spec.center) != domain.dim:
            raise InvalidInputError(
                ErrorMessages.format_error(
                    ErrorMessages.DIMENSION, f"bump center {spec.center} on a {domain.dim}-d grid"
                )
            )
        _support_check(domain, spec, mask)

    def value(x: np.ndarray) -> np.ndarray:
        return sum(spec.value(x) for spec in specs)

    def gradient(x: np.ndarray) -> np.ndarray:
        return sum(spec.gradient(x) for spec in specs)[..., np.newaxis, :]

    def hessian(x: np.ndarray) -> np.ndarray:
        return sum(spec.hessian(x) for spec in specs)[..., np.newaxis, :, :]

    return GridField.from_function(domain, value, gradient=gradient, hessian=hessian, name=name)


def make_bump(
    spec: BumpSpec, domain: GridDomain, mask: Optional[SubdomainMask] = None
) -> GridField:
    """Single bump; its support must sit compactly inside ``mask`` (or the grid interior)."""
    return make_bumps([spec], domain, mask)


def zero_field(domain: GridDomain, name: str = "zero") -> GridField:
    n = domain.dim

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (1, n))

    def hessian(x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (1, n, n))

    return GridField(
        domain=domain,
        values=np.zeros(domain.shape),
        gradient_fn=gradient,
        hessian_fn=hessian,
        name=name,
    )


def rank_one_variation(u: GridField, xi: Sequence[float], phi: GridField) -> GridField:
    """The competitor ``u + xi * phi``; its gradient differs from Du by ``xi (x) Dphi``."""
    direction, _ = unit_vector(xi)
    if direction.size != u.N:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"xi of length {direction.size} for N={u.N}"
            )
        )
    if phi.domain.shape != u.domain.shape or phi.domain.h != u.domain.h:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, "phi lives on another grid")
        )
    scalar = phi.scalar()
    values = u.values + direction * scalar[..., np.newaxis]

    gradient_fn = None
    if u.gradient_fn is not None and phi.gradient_fn is not None:
        u_grad, phi_grad = u.gradient_fn, phi.gradient_fn

        def gradient_fn(x: np.ndarray) -> np.ndarray:
            return u_grad(x) + direction[:, np.newaxis] * phi_grad(x)

    hessian_fn = None
    if u.hessian_fn is not None and phi.hessian_fn is not None:
        u_hess, phi_hess = u.hessian_fn, phi.hessian_fn

        def hessian_fn(x: np.ndarray) -> np.ndarray:
            return u_hess(x) + direction[:, np.newaxis, np.newaxis] * phi_hess(x)

    return GridField(
        domain=u.domain,
        values=values,
        gradient_fn=gradient_fn,
        hessian_fn=hessian_fn,
        name=f"{u.name}+xi*{phi.name}",
    )


class VariationSpec(BaseModel):
    """Direction xi plus the bumps whose sum is the scalar phi of ``u + xi * phi``."""

    xi: List[float] = Field(description="Direction in R^N, normalised on use")
    bumps: List[BumpSpec] = Field(default_factory=list, description="Empty means phi = 0")

    def phi(self, domain: GridDomain, mask: Optional[SubdomainMask] = None) -> GridField:
        if not self.bumps:
            return zero_field(domain)
        return make_bumps(self.bumps, domain, mask)

    def apply(self, u: GridField, mask: Optional[SubdomainMask] = None) -> GridField:
        return rank_one_variation(u, self.xi, self.phi(u.domain, mask))
