"""Jensen-type inequality for level-convex functions under discrete measures.

For a level-convex Phi and a probability measure mu,
Phi(sum_i w_i f_i) <= max_{w_i > 0} Phi(f_i).
"""

import logging
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.hamiltonian import HamiltonianSpec
from supremal.utilities.constants import DEFAULT_SEED, JENSEN_TOL, WEIGHT_SUM_TOL
from supremal.utilities.errors import ErrorMessages, InvalidInputError, ParameterError

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[np.ndarray], np.ndarray]


class JensenResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lhs: float = Field(description="Phi at the barycentre")
    rhs: float = Field(description="Largest Phi over the support of the measure")
    passed: bool = Field(alias="pass")
    tol: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def _measure(weights: object, values: object) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(weights, dtype=float).ravel()
    f = np.asarray(values, dtype=float)
    if f.ndim == 1:
        f = f[:, np.newaxis]
    if f.ndim != 2 or f.shape[0] != w.size or w.size == 0:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"{w.size} weights for values of shape {f.shape}"
            )
        )
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(f))):
        raise InvalidInputError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, "measure"))
    if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ParameterError(
            f"Weights must be nonnegative and sum to 1, got sum {w.sum()!r}, min {w.min()!r}"
        )
    return w, f


def jensen_check(
    phi: ScalarFunction, weights: object, values: object, tol: float = JENSEN_TOL
) -> JensenResult:
    """Compare Phi(sum w_i f_i) with the mu-essential supremum of Phi(f)."""
    w, f = _measure(weights, values)
    barycentre = w @ f
    lhs = float(np.asarray(phi(barycentre[np.newaxis, :])).ravel()[0])
    support = f[w > 0]
    rhs = float(np.max(np.asarray(phi(support), dtype=float)))
    return JensenResult(lhs=lhs, rhs=rhs, passed=lhs <= rhs + tol, tol=tol)


def section_of(H: HamiltonianSpec, x: Optional[object] = None) -> ScalarFunction:
    """Phi(p) = H(x, P) with P the row-major reshape of p in R^{N n}."""
    point = np.zeros(H.n) if x is None else np.asarray(x, dtype=float)

    def phi(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return H.evaluate(point, p.reshape(p.shape[:-1] + H.dims))

    return phi


class JensenTrials(BaseModel):
    trials: int
    failures: int
    worst_margin: float = Field(description="Smallest rhs - lhs seen")
    worst: Optional[JensenResult] = None
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def jensen_trials(
    phi: ScalarFunction,
    dim: int,
    trials: int = 1000,
    support: int = 5,
    seed: int = DEFAULT_SEED,
    scale: float = 1.0,
    tol: float = JENSEN_TOL,
) -> JensenTrials:
    """Random discrete measures with up to ``support`` atoms; some weights are zero."""
    if trials < 1 or support < 1:
        raise ParameterError(f"trials and support must be >= 1, got {trials}, {support}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    failures, worst, worst_margin = 0, None, np.inf
    for _ in range(trials):
        m = int(rng.integers(1, support + 1))
        w = rng.exponential(size=m)
        w[rng.random(m) < 0.2] = 0.0
        if not w.any():
            w[0] = 1.0
        w = w / w.sum()
        result = jensen_check(phi, w, scale * rng.standard_normal((m, dim)), tol)
        failures += not result.passed
        if result.margin < worst_margin:
            worst, worst_margin = result, result.margin
    logger.info(f"Jensen trials: {failures} failures in {trials}, worst margin {worst_margin:.3g}")
    return JensenTrials(
        trials=trials,
        failures=failures,
        worst_margin=float(worst_margin),
        worst=worst,
        seed=seed,
        tol=tol,
    )


def annulus_control(dim: int = 2) -> JensenResult:
    """Phi(p) = | |p|^2 - 1 | with mu = (1/2, 1/2) on {e_1, -e_1}: lhs 1, rhs 0."""
    e1 = np.zeros(dim)
    e1[0] = 1.0

    def phi(p: np.ndarray) -> np.ndarray:
        return np.abs(np.sum(p * p, axis=-1) - 1.0)

    return jensen_check(phi, [0.5, 0.5], np.stack([e1, -e1]))

