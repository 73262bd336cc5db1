import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from supremal.grid.domain import GridDomain, Index, SubdomainMask
from supremal.utilities.errors import (
    ErrorMessages,
    InvalidInputError,
    OutOfStencilError,
)

logger = logging.getLogger(__name__)

# (m, n) points -> (m, N) values / (m, N, n) gradients / (m, N, n, n) Hessians
Closure = Callable[[np.ndarray], np.ndarray]


class GridField(BaseModel):
    """Vector-valued map sampled on a grid, values of shape ``(*domain.shape, N)``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    domain: GridDomain
    values: np.ndarray = Field(description="Samples, shape (*shape, N)")
    gradient_fn: Optional[Closure] = Field(
        default=None, description="Analytic gradient closure, (m, n) -> (m, N, n)"
    )
    hessian_fn: Optional[Closure] = Field(
        default=None, description="Analytic Hessian closure, (m, n) -> (m, N, n, n)"
    )
    name: str = Field(default="field")

    @model_validator(mode="after")
    def check_values(self) -> "GridField":
        shape = self.domain.shape
        if self.values.ndim == len(shape):
            self.values = self.values[..., np.newaxis]
        if self.values.shape[:-1] != shape:
            raise ValueError(
                f"Values of shape {self.values.shape} do not match grid {shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"Field '{self.name}' has non-finite samples")
        self.values = np.asarray(self.values, dtype=float)
        return self

    @classmethod
    def from_function(
        cls,
        domain: GridDomain,
        fn: Closure,
        gradient: Optional[Closure] = None,
        hessian: Optional[Closure] = None,
        name: str = "field",
    ) -> "GridField":
        values = np.asarray(fn(domain.points()), dtype=float)
        return cls(
            domain=domain, values=values, gradient_fn=gradient, hessian_fn=hessian, name=name
        )

    @property
    def N(self) -> int:
        return int(self.values.shape[-1])

    @property
    def n(self) -> int:
        return self.domain.dim

    @property
    def is_scalar(self) -> bool:
        return self.N == 1

    @property
    def has_gradient(self) -> bool:
        return self.gradient_fn is not None

    @property
    def has_hessian(self) -> bool:
        return self.hessian_fn is not None

    def scalar(self) -> np.ndarray:
        if not self.is_scalar:
            raise InvalidInputError(f"Field '{self.name}' is not scalar (N={self.N})")
        return self.values[..., 0]

    def with_values(self, values: np.ndarray, name: Optional[str] = None) -> "GridField":
        """Same grid, new samples, closures dropped."""
        return GridField(domain=self.domain, values=values, name=name or self.name)


def _check_stencil(domain: GridDomain, indices: np.ndarray) -> None:
    shape = np.asarray(domain.shape)
    bad = np.any((indices < 1) | (indices > shape - 2), axis=-1)
    if np.any(bad):
        first = tuple(int(i) for i in indices[np.argmax(bad)])
        raise OutOfStencilError(ErrorMessages.format_error(ErrorMessages.STENCIL, first))


def _as_indices(domain: GridDomain, indices: object) -> np.ndarray:
    arr = np.asarray(indices, dtype=int)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != domain.dim:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"indices {arr.shape}")
        )
    return arr


def _shifted(f: GridField, indices: np.ndarray, offset: Sequence[int]) -> np.ndarray:
    moved = indices + np.asarray(offset, dtype=int)
    return f.values[tuple(moved.T)]


def gradient_at(f: GridField, indices: object, use_analytic: bool = False) -> np.ndarray:
    """Gradients at many grid indices, shape ``(m, N, n)``."""
    idx = _as_indices(f.domain, indices)
    if use_analytic and f.gradient_fn is not None:
        return np.asarray(f.gradient_fn(f.domain.points_at(idx)), dtype=float)
    _check_stencil(f.domain, idx)
    n, h = f.n, f.domain.h
    out = np.empty((idx.shape[0], f.N, n))
    for i in range(n):
        e = np.zeros(n, dtype=int)
        e[i] = 1
        out[:, :, i] = (_shifted(f, idx, e) - _shifted(f, idx, -e)) / (2 * h)
    return out


def hessian_at(f: GridField, indices: object, use_analytic: bool = False) -> np.ndarray:
    """Hessians of every component at many grid indices, shape ``(m, N, n, n)``."""
    idx = _as_indices(f.domain, indices)
    if use_analytic and f.hessian_fn is not None:
        return np.asarray(f.hessian_fn(f.domain.points_at(idx)), dtype=float)
    _check_stencil(f.domain, idx)
    n, h = f.n, f.domain.h
    centre = f.values[tuple(idx.T)]
    out = np.empty((idx.shape[0], f.N, n, n))
    eye = np.eye(n, dtype=int)
    for i in range(n):
        out[:, :, i, i] = (
            _shifted(f, idx, eye[i]) - 2 * centre + _shifted(f, idx, -eye[i])
        ) / h**2
        for j in range(i + 1, n):
            mixed = (
                _shifted(f, idx, eye[i] + eye[j])
                - _shifted(f, idx, eye[i] - eye[j])
                - _shifted(f, idx, eye[j] - eye[i])
                + _shifted(f, idx, -eye[i] - eye[j])
            ) / (4 * h**2)
            out[:, :, i, j] = mixed
            out[:, :, j, i] = mixed
    return out


def gradient(f: GridField, index: Index, use_analytic: bool = False) -> np.ndarray:
    """Central-difference gradient ``(N, n)`` at one grid index."""
    return gradient_at(f, [index], use_analytic=use_analytic)[0]


def hessian(
    f: GridField, component: int, index: Index, use_analytic: bool = False
) -> np.ndarray:
    """Symmetric ``(n, n)`` Hessian of component ``component`` at one grid index."""
    if not 0 <= component < f.N:
        raise InvalidInputError(f"Component {component} out of range for N={f.N}")
    return hessian_at(f, [index], use_analytic=use_analytic)[0, component]


def gradient_field(
    f: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """``(indices, gradients)`` over every masked point."""
    idx = mask.indices()
    return idx, gradient_at(f, idx, use_analytic=use_analytic)


def hessian_field(
    f: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    idx = mask.indices()
    return idx, hessian_at(f, idx, use_analytic=use_analytic)


def ess_sup(values: object) -> float:
    """Grid surrogate of the essential supremum: the plain maximum."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, "ess_sup of no values")
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, "values"))
    return float(arr.max())


def masked_values(f: GridField, mask: SubdomainMask) -> np.ndarray:
    if mask.shape != f.domain.shape:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"mask {mask.shape}")
        )
    return f.values[mask.flags]
