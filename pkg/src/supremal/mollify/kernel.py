import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy import signal

from supremal.utilities.constants import MIN_RING_CELLS
from supremal.utilities.errors import ErrorMessages, InvalidInputError

logger = logging.getLogger(__name__)

PaddingMode = Literal["odd", "zero"]


class MollifierKernel(BaseModel):
    """Standard mollifier exp(-1 / (1 - |y/eps|^2)) sampled on the grid.

    Weights are normalised to unit discrete mass; a radius below one cell
    degenerates to the identity stencil.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    radius: float = Field(gt=0, description="Support radius eps")
    h: float = Field(gt=0, description="Grid spacing")
    dim: int = Field(ge=1)

    _weights: np.ndarray = PrivateAttr()
    _half: int = PrivateAttr(default=0)

    @model_validator(mode="after")
    def build_weights(self) -> "MollifierKernel":
        half = int(np.floor(self.radius / self.h))
        axis = np.arange(-half, half + 1) * self.h
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        s2 = sum(m * m for m in mesh) / self.radius**2
        weights = np.zeros(s2.shape)
        inside = s2 < 1.0
        weights[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
        self._weights = weights / weights.sum()
        self._half = half
        return self

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def half_width(self) -> int:
        """Stencil half width in cells."""
        return self._half

    @property
    def mass(self) -> float:
        return float(self._weights.sum())

    @property
    def resolved(self) -> bool:
        return self.radius >= MIN_RING_CELLS * self.h * (1 - 1e-9)

    def first_moment(self, axis: int = 0) -> float:
        """Discrete E|y_axis| / eps of the normalised kernel."""
        half = self._half
        coords = np.abs(np.arange(-half, half + 1)) * self.h / self.radius
        shape = [1] * self.dim
        shape[axis] = coords.size
        return float(np.sum(self._weights * coords.reshape(shape)))

    def apply(self, values: np.ndarray, padding: PaddingMode = "odd") -> np.ndarray:
        """Convolve a scalar grid array; the result has the input's shape.

        ``odd`` pads by point reflection about the edge, which extends affine
        data exactly; ``zero`` pads with zeros.
        """
        arr = np.asarray(values, dtype=float)
        if arr.ndim != self.dim:
            raise InvalidInputError(
                ErrorMessages.format_error(
                    ErrorMessages.DIMENSION, f"array of rank {arr.ndim} for a {self.dim}-d kernel"
                )
            )
        if self._half == 0:
            return arr.copy()
        pad = self._half
        if padding == "odd":
            if any(k <= pad for k in arr.shape):
                raise InvalidInputError(
                    f"Kernel half width {pad} exceeds the grid extent {arr.shape}"
                )
            padded = np.pad(arr, pad, mode="reflect", reflect_type="odd")
        else:
            padded = np.pad(arr, pad, mode="constant", constant_values=0.0)
        return signal.convolve(padded, self._weights, mode="valid")
