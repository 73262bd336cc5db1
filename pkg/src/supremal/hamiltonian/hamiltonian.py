import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, model_validator

from supremal.hamiltonian.expression import (
    Node,
    check_dims,
    evaluate_node,
    parse_expression,
    to_text,
    used_dims,
)
from supremal.utilities.errors import (
    ErrorMessages,
    HamiltonianContractError,
    InvalidInputError,
)

logger = logging.getLogger(__name__)

HamiltonianKind = Literal["euclidean-norm", "weighted-eikonal", "annulus", "custom-expression"]

CLAIMED_LEVEL_CONVEX: Dict[str, bool] = {
    "euclidean-norm": True,
    "weighted-eikonal": True,
    "annulus": False,
}


class HamiltonianSpec(BaseModel):
    """An evaluatable H(x, P) >= 0 on R^n x R^{N x n}."""

    kind: HamiltonianKind = Field(default="euclidean-norm")
    N: int = Field(default=1, ge=1, description="Rows of P (target dimension)")
    n: int = Field(default=1, ge=1, description="Columns of P (domain dimension)")
    expression: Optional[str] = Field(
        default=None,
        description=(
            "H(x,P) for custom-expression, or the positive weight a(x) for weighted-eikonal"
        ),
    )
    weights: Optional[List[List[float]]] = Field(
        default=None, description="Entry weights w for weighted-eikonal, shape (N, n)"
    )
    claimed_rank_one_level_convex: Optional[bool] = Field(
        default=None, description="Metadata: whether H(x,.) is claimed rank-one level-convex"
    )

    _tree: Optional[Node] = PrivateAttr(default=None)
    _weights: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def compile_spec(self) -> "HamiltonianSpec":
        if self.kind in ("custom-expression", "weighted-eikonal"):
            text = self.expression
            if text is None:
                if self.kind == "custom-expression":
                    raise ValueError("custom-expression needs an expression")
                text = "1"
            self._tree = parse_expression(text)
            check_dims(self._tree, self.N, self.n)
        elif self.expression is not None:
            raise ValueError(f"Builtin '{self.kind}' takes no expression")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.N, self.n) or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError(f"Weights must be a nonnegative ({self.N}, {self.n}) array")
            self._weights = w
        if self.claimed_rank_one_level_convex is None:
            self.claimed_rank_one_level_convex = CLAIMED_LEVEL_CONVEX.get(self.kind, False)
        return self

    @property
    def dims(self) -> Tuple[int, int]:
        return self.N, self.n

    @property
    def depends_on_x(self) -> bool:
        if self._tree is None:
            return False
        return used_dims(self._tree)[0] > 0

    def describe(self) -> str:
        if self.kind == "custom-expression" and self._tree is not None:
            return to_text(self._tree)
        if self.kind == "weighted-eikonal" and self._tree is not None:
            return f"{to_text(self._tree)} * |P|_w"
        return self.kind

    def _check_shapes(self, x: np.ndarray, P: np.ndarray) -> None:
        if x.shape[-1:] != (self.n,) or P.shape[-2:] != (self.N, self.n):
            raise InvalidInputError(
                ErrorMessages.format_error(
                    ErrorMessages.DIMENSION,
                    f"x {x.shape}, P {P.shape} for dims ({self.N}, {self.n})",
                )
            )

    def evaluate(self, x: Any, P: Any) -> np.ndarray:
        """H at batched ``x`` ``(..., n)`` and ``P`` ``(..., N, n)``."""
        x = np.asarray(x, dtype=float)
        P = np.asarray(P, dtype=float)
        self._check_shapes(x, P)
        batch = np.broadcast_shapes(x.shape[:-1], P.shape[:-2])

        if self.kind == "euclidean-norm":
            value = np.sqrt(np.sum(P * P, axis=(-2, -1)))
        elif self.kind == "annulus":
            value = np.abs(np.sum(P * P, axis=(-2, -1)) - 1.0)
        elif self.kind == "weighted-eikonal":
            a = np.broadcast_to(evaluate_node(self._tree, x, P), batch)  # type: ignore[arg-type]
            if np.any(~np.isfinite(a)) or np.any(a <= 0):
                raise HamiltonianContractError(
                    ErrorMessages.format_error(
                        ErrorMessages.CONTRACT, "weight a(x) must be positive"
                    )
                )
            w = self._weights if self._weights is not None else 1.0
            value = a * np.sqrt(np.sum(w * P * P, axis=(-2, -1)))
        else:
            value = evaluate_node(self._tree, x, P)  # type: ignore[arg-type]

        value = np.broadcast_to(np.asarray(value, dtype=float), batch)
        if not np.all(np.isfinite(value)):
            raise HamiltonianContractError(
                ErrorMessages.format_error(
                    ErrorMessages.CONTRACT, f"non-finite value of {self.describe()}"
                )
            )
        if np.any(value < 0):
            raise HamiltonianContractError(
                ErrorMessages.format_error(
                    ErrorMessages.CONTRACT, f"negative value {value.min()} of {self.describe()}"
                )
            )
        return value

    def __call__(self, x: Any, P: Any) -> float:
        """Scalar evaluation at a single point."""
        return float(self.evaluate(x, P))


def eval_hamiltonian(H: HamiltonianSpec, x: Any, P: Any) -> float:
    return H(x, P)


def parse(text: str, dims: Optional[Tuple[int, int]] = None) -> HamiltonianSpec:
    """Parse expression text into a custom-expression Hamiltonian.

    Without ``dims`` the shape is inferred from the variables used; ``norm(P)``
    on its own needs explicit dims.
    """
    tree = parse_expression(text)
    if dims is None:
        n_x, rows, cols, whole = used_dims(tree)
        if whole and rows == 0:
            raise InvalidInputError(f"Cannot infer dims of {text!r}; pass dims=(N, n)")
        dims = (max(rows, 1), max(cols, n_x, 1))
    N, n = dims
    check_dims(tree, N, n)
    spec = HamiltonianSpec(kind="custom-expression", N=N, n=n, expression=text)
    logger.debug(f"Parsed Hamiltonian {spec.describe()} with dims {dims}")
    return spec


def builtin(kind: HamiltonianKind, N: int, n: int, **kwargs: Any) -> HamiltonianSpec:
    """Build any kind, surfacing expression errors with their line and column."""
    expression = kwargs.get("expression")
    if expression is not None:
        check_dims(parse_expression(expression), N, n)
    return HamiltonianSpec(kind=kind, N=N, n=n, **kwargs)
