"""Catalog of analytic fields with exact gradients and Hessians."""

import logging
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.grid import GridDomain, GridField
from supremal.utilities.errors import (
    ErrorMessages,
    InvalidInputError,
    SingularPointError,
    UnknownFieldError,
)

logger = logging.getLogger(__name__)

Closure = Callable[[np.ndarray], np.ndarray]

_SINGULAR_TOL = 1e-14


class AnalyticField(BaseModel):
    """Closed-form map u: R^n -> R^N; closures take ``(..., n)`` points and return
    ``(..., N)`` values, ``(..., N, n)`` gradients and ``(..., N, n, n)`` Hessians."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    N: int = Field(ge=1)
    n: int = Field(ge=1)
    value: Closure = Field(exclude=True)
    gradient: Closure = Field(exclude=True)
    hessian: Closure = Field(exclude=True)
    smoothness: Literal["smooth", "lipschitz"] = Field(
        default="smooth", description="C-infinity, or Lipschitz with a declared singular set"
    )
    singular_set: str = Field(default="none", description="Where the closures are undefined")
    facts: Dict[str, Any] = Field(default_factory=dict, description="Known properties")

    @property
    def dims(self) -> tuple[int, int]:
        return self.N, self.n

    def sample(self, domain: GridDomain) -> GridField:
        """Values on the grid with the gradient and Hessian closures attached."""
        if domain.dim != self.n:
            raise InvalidInputError(
                ErrorMessages.format_error(
                    ErrorMessages.DIMENSION, f"'{self.name}' has n={self.n}, grid has {domain.dim}"
                )
            )
        return GridField.from_function(
            domain, self.value, gradient=self.gradient, hessian=self.hessian, name=self.name
        )


def _norms(x: np.ndarray, what: str) -> np.ndarray:
    r = np.linalg.norm(x, axis=-1)
    if np.any(r <= _SINGULAR_TOL):
        raise SingularPointError(f"'{what}' is evaluated on its singular set")
    return r


def affine(
    A: Optional[Sequence[Sequence[float]]] = None, b: Optional[Sequence[float]] = None
) -> AnalyticField:
    """u(x) = A x + b; the default A is the unit row (0.6, 0.8)."""
    mat = np.asarray(A if A is not None else [[0.6, 0.8]], dtype=float)
    if mat.ndim == 1:
        mat = mat[np.newaxis, :]
    N, n = mat.shape
    shift = np.zeros(N) if b is None else np.asarray(b, dtype=float)
    if shift.shape != (N,):
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"b of shape {shift.shape}")
        )

    def value(x: np.ndarray) -> np.ndarray:
        return x @ mat.T + shift

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(mat, x.shape[:-1] + (N, n)).copy()

    def hessian(x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (N, n, n))

    return AnalyticField(
        name="affine",
        N=N,
        n=n,
        value=value,
        gradient=gradient,
        hessian=hessian,
        facts={"|Du|": float(np.linalg.norm(mat)), "infty_harmonic": True},
    )


def cone(n: int = 2) -> AnalyticField:
    """u(x) = |x|, eikonal off the origin."""

    def value(x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(x, axis=-1)

    def gradient(x: np.ndarray) -> np.ndarray:
        r = _norms(x, "cone")
        return (x / r[..., np.newaxis])[..., np.newaxis, :]

    def hessian(x: np.ndarray) -> np.ndarray:
        r = _norms(x, "cone")
        nu = x / r[..., np.newaxis]
        out = np.eye(n) - nu[..., :, np.newaxis] * nu[..., np.newaxis, :]
        out = out / r[..., np.newaxis, np.newaxis]
        return out[..., np.newaxis, :, :]

    return AnalyticField(
        name="cone",
        N=1,
        n=n,
        value=value,
        gradient=gradient,
        hessian=hessian,
        smoothness="lipschitz",
        singular_set="{0}",
        facts={"hj_level": {"euclidean-norm": 1.0}, "infty_harmonic": "off 0"},
    )


def complex_exp() -> AnalyticField:
    """u(x, y) = e^{ix} - e^{iy} as (cos x - cos y, sin x - sin y).

    Rows are components, columns are d/dx and d/dy. |Du|^2 = 2 everywhere and
    det Du = sin(x - y), so the gradient has rank 1 exactly on the diagonal.
    """

    def value(p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        return np.stack([np.cos(x) - np.cos(y), np.sin(x) - np.sin(y)], axis=-1)

    def gradient(p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        row1 = np.stack([-np.sin(x), np.sin(y)], axis=-1)
        row2 = np.stack([np.cos(x), -np.cos(y)], axis=-1)
        return np.stack([row1, row2], axis=-2)

    def hessian(p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        out = np.zeros(p.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0] = -np.cos(x)
        out[..., 0, 1, 1] = np.cos(y)
        out[..., 1, 0, 0] = -np.sin(x)
        out[..., 1, 1, 1] = np.sin(y)
        return out

    return AnalyticField(
        name="complex-exp",
        N=2,
        n=2,
        value=value,
        gradient=gradient,
        hessian=hessian,
        facts={
            "hj_level": {"euclidean-norm": float(np.sqrt(2.0))},
            "infty_harmonic": True,
            "rank": "1 on x = y, 2 elsewhere",
        },
    )


def distance_to_set(points: Optional[Sequence[Sequence[float]]] = None) -> AnalyticField:
    """u(x) = min_k |x - e_k| over a finite set; the closures follow the first nearest point."""
    E = np.asarray(points if points is not None else [[-0.5, 0.0], [0.5, 0.0]], dtype=float)
    if E.ndim != 2 or E.shape[0] == 0:
        raise InvalidInputError("distance-to-set needs a non-empty (k, n) point set")
    n = E.shape[1]

    def nearest(x: np.ndarray) -> np.ndarray:
        diff = x[..., np.newaxis, :] - E
        k = np.argmin(np.linalg.norm(diff, axis=-1), axis=-1)
        return np.take_along_axis(diff, k[..., np.newaxis, np.newaxis], axis=-2)[..., 0, :]

    def value(x: np.ndarray) -> np.ndarray:
        return np.min(np.linalg.norm(x[..., np.newaxis, :] - E, axis=-1), axis=-1)

    def gradient(x: np.ndarray) -> np.ndarray:
        d = nearest(x)
        r = _norms(d, "distance-to-set")
        return (d / r[..., np.newaxis])[..., np.newaxis, :]

    def hessian(x: np.ndarray) -> np.ndarray:
        d = nearest(x)
        r = _norms(d, "distance-to-set")
        nu = d / r[..., np.newaxis]
        out = np.eye(n) - nu[..., :, np.newaxis] * nu[..., np.newaxis, :]
        out = out / r[..., np.newaxis, np.newaxis]
        return out[..., np.newaxis, :, :]

    return AnalyticField(
        name="distance-to-set",
        N=1,
        n=n,
        value=value,
        gradient=gradient,
        hessian=hessian,
        smoothness="lipschitz",
        singular_set="E and its medial axis",
        facts={"hj_level": {"euclidean-norm": 1.0}, "set": E.tolist()},
    )


def one_d_pair() -> AnalyticField:
    """The curve u(t) = (t^2, t); the system reduces to |u'|^2 u'' = (2(4t^2 + 1), 0)."""

    def value(t: np.ndarray) -> np.ndarray:
        s = t[..., 0]
        return np.stack([s**2, s], axis=-1)

    def gradient(t: np.ndarray) -> np.ndarray:
        s = t[..., 0]
        return np.stack([2 * s, np.ones_like(s)], axis=-1)[..., np.newaxis]

    def hessian(t: np.ndarray) -> np.ndarray:
        out = np.zeros(t.shape[:-1] + (2, 1, 1))
        out[..., 0, 0, 0] = 2.0
        return out

    return AnalyticField(
        name="one-d-pair",
        N=2,
        n=1,
        value=value,
        gradient=gradient,
        hessian=hessian,
        facts={"infty_laplacian_at_1": [10.0, 0.0]},
    )


_CATALOG: Dict[str, Callable[..., AnalyticField]] = {
    "affine": affine,
    "cone": cone,
    "complex-exp": complex_exp,
    "distance-to-set": distance_to_set,
    "one-d-pair": one_d_pair,
}


def names() -> List[str]:
    return list(_CATALOG)


def get(name: str, **params: Any) -> AnalyticField:
    if name not in _CATALOG:
        raise UnknownFieldError(f"Unknown gallery field '{name}', expected one of {names()}")
    return _CATALOG[name](**params)


def sample(name: str, domain: GridDomain, **params: Any) -> GridField:
    return get(name, **params).sample(domain)


def describe() -> List[Dict[str, Any]]:
    """One row per catalog entry with default parameters."""
    rows = []
    for key in _CATALOG:
        entry = get(key)
        rows.append(
            {
                "name": key,
                "dims": f"{entry.N}x{entry.n}",
                "smoothness": entry.smoothness,
                "singular_set": entry.singular_set,
                "facts": entry.facts,
            }
        )
    return rows
