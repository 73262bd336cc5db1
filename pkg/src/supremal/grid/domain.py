import logging
from itertools import product
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy import ndimage

from supremal.utilities.errors import ContainmentError, ErrorMessages, InvalidInputError

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]

_COUNT_TOL = 1e-9


class GridDomain(BaseModel):
    """Uniform rectangular grid over a box in R^n."""

    lower: List[float] = Field(description="Lower corner of the box")
    upper: List[float] = Field(description="Upper corner of the box")
    h: float = Field(gt=0, description="Uniform spacing on every axis")

    _shape: Tuple[int, ...] = PrivateAttr(default=())

    @field_validator("lower", "upper")
    @classmethod
    def check_finite(cls, v: List[float]) -> List[float]:
        if not v or not all(np.isfinite(v)):
            raise ValueError("Corners must be non-empty finite vectors")
        return [float(c) for c in v]

    @model_validator(mode="after")
    def check_counts(self) -> "GridDomain":
        if len(self.lower) != len(self.upper):
            raise ValueError("Corners must have the same dimension")
        counts = []
        for lo, up in zip(self.lower, self.upper):
            if up <= lo:
                raise ValueError("Upper corner must exceed lower corner componentwise")
            cells = (up - lo) / self.h
            rounded = round(cells)
            if abs(cells - rounded) > _COUNT_TOL * max(1.0, cells):
                raise ValueError(
                    f"Extent {up - lo} is not a multiple of h={self.h} (ratio {cells})"
                )
            if rounded + 1 < 3:
                raise ValueError("Every axis needs at least 3 points")
            counts.append(int(rounded) + 1)
        self._shape = tuple(counts)
        return self

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self._shape

    @property
    def size(self) -> int:
        return int(np.prod(self._shape))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def coords(self) -> List[np.ndarray]:
        return [lo + self.h * np.arange(k) for lo, k in zip(self.lower, self._shape)]

    def points(self) -> np.ndarray:
        """All grid points, shape ``(*shape, n)``."""
        return np.stack(np.meshgrid(*self.coords(), indexing="ij"), axis=-1)

    def point(self, index: Sequence[int]) -> np.ndarray:
        idx = np.asarray(index, dtype=float)
        return np.asarray(self.lower) + self.h * idx

    def points_at(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(self.lower) + self.h * np.asarray(indices, dtype=float)

    def index_of(self, point: Sequence[float]) -> Index:
        """Nearest grid index to ``point``; raises if it falls outside the grid."""
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dim,):
            raise InvalidInputError(
                ErrorMessages.format_error(ErrorMessages.DIMENSION, f"point {x.shape}")
            )
        idx = np.rint((x - np.asarray(self.lower)) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self._shape)):
            raise InvalidInputError(f"Point {x.tolist()} lies outside the grid")
        return tuple(int(i) for i in idx)

    def neighbour_offsets(self) -> Iterator[Index]:
        """The 3^n - 1 nonzero offsets of the full neighbourhood."""
        for offset in product((-1, 0, 1), repeat=self.dim):
            if any(offset):
                yield offset

    def outer_layers(self, depth: int) -> np.ndarray:
        """Boolean array marking the ``depth`` outermost layers of the grid."""
        inner = np.zeros(self._shape, dtype=bool)
        inner[tuple(slice(depth, k - depth) for k in self._shape)] = True
        return ~inner


class SubdomainMask(BaseModel):
    """Boolean selection of grid points encoding a compactly contained subdomain."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    flags: np.ndarray = Field(description="Boolean flag per grid point")
    depth: int = Field(default=1, ge=1, description="Boundary-layer depth in cells")
    label: str = Field(default="mask", description="Identifier used in reports")

    @field_validator("flags", mode="before")
    @classmethod
    def check_flags(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v)
        if arr.dtype != bool:
            arr = arr.astype(bool)
        return arr

    @model_validator(mode="after")
    def check_inside(self) -> "SubdomainMask":
        d = self.depth
        if any(k <= 2 * d for k in self.flags.shape) and self.flags.any():
            raise ValueError("Grid too small for the requested boundary layer")
        inner = np.zeros(self.flags.shape, dtype=bool)
        inner[tuple(slice(d, k - d) for k in self.flags.shape)] = True
        if np.any(self.flags & ~inner):
            raise ValueError(
                f"Mask '{self.label}' reaches the outer {d} layer(s) of the grid"
            )
        return self

    @classmethod
    def interior_of(
        cls, domain: GridDomain, depth: int = 1, label: str = "interior"
    ) -> "SubdomainMask":
        return cls(flags=~domain.outer_layers(depth), depth=depth, label=label)

    @classmethod
    def from_predicate(
        cls,
        domain: GridDomain,
        predicate: Callable[[np.ndarray], np.ndarray],
        depth: int = 1,
        label: str = "predicate",
    ) -> "SubdomainMask":
        """Points where ``predicate(points)`` holds, clipped to the grid interior."""
        selected = np.asarray(predicate(domain.points()), dtype=bool)
        if selected.shape != domain.shape:
            raise InvalidInputError(
                ErrorMessages.format_error(ErrorMessages.DIMENSION, f"predicate {selected.shape}")
            )
        return cls(flags=selected & ~domain.outer_layers(depth), depth=depth, label=label)

    @classmethod
    def box(
        cls,
        domain: GridDomain,
        lower: Sequence[float],
        upper: Sequence[float],
        depth: int = 1,
        label: str = "box",
    ) -> "SubdomainMask":
        lo = np.asarray(lower, dtype=float) - 1e-9 * domain.h
        up = np.asarray(upper, dtype=float) + 1e-9 * domain.h
        return cls.from_predicate(
            domain,
            lambda x: np.all((x >= lo) & (x <= up), axis=-1),
            depth=depth,
            label=label,
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.flags.shape)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    def is_empty(self) -> bool:
        return self.count == 0

    def indices(self) -> np.ndarray:
        """Masked indices in C order, shape ``(count, n)``."""
        return np.argwhere(self.flags)

    def _structure(self) -> np.ndarray:
        return ndimage.generate_binary_structure(self.flags.ndim, self.flags.ndim)

    def boundary_layer(self) -> np.ndarray:
        """Unmasked points adjacent (full connectivity) to the mask."""
        grown = ndimage.binary_dilation(self.flags, structure=self._structure())
        return grown & ~self.flags

    def erode(self, cells: int = 1, label: Optional[str] = None) -> "SubdomainMask":
        if cells < 1:
            return self
        shrunk = ndimage.binary_erosion(
            self.flags, structure=self._structure(), iterations=cells, border_value=0
        )
        return SubdomainMask(flags=shrunk, depth=self.depth, label=label or f"{self.label}-eroded")

    def subset_of(self, other: "SubdomainMask") -> bool:
        return not np.any(self.flags & ~other.flags)


def ball_mask(
    domain: GridDomain,
    center: Sequence[float],
    radius: float,
    parent: Optional[SubdomainMask] = None,
    depth: int = 1,
) -> SubdomainMask:
    """Closed ball ``|x - center| <= radius`` as a mask compactly inside ``parent``.

    Compact containment means the ball grown by ``depth`` cells (full
    connectivity) still lies in the parent, or in the grid interior when no
    parent is given.
    """
    if not radius >= 0:
        raise InvalidInputError(f"Radius must be nonnegative, got {radius}")
    c = np.asarray(center, dtype=float)
    if c.shape != (domain.dim,):
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"center {c.shape}")
        )
    dist = np.linalg.norm(domain.points() - c, axis=-1)
    flags = dist <= radius + 1e-9 * domain.h
    if not flags.any():
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.EMPTY_MASK, f"ball of radius {radius}")
        )
    host = parent.flags if parent is not None else ~domain.outer_layers(depth)
    structure = ndimage.generate_binary_structure(domain.dim, domain.dim)
    grown = ndimage.binary_dilation(flags, structure=structure, iterations=depth)
    if np.any(grown & ~host) or np.any(flags & domain.outer_layers(depth)):
        raise ContainmentError(
            ErrorMessages.format_error(
                ErrorMessages.NOT_CONTAINED,
                f"ball at {c.tolist()} with radius {radius}",
            )
        )
    return SubdomainMask(
        flags=flags, depth=depth, label=f"ball({','.join(f'{v:.6g}' for v in c)};{radius:.6g})"
    )
