"""The minimality inequality E_inf(u, mask) <= inf over extremum balls of E_inf(u + xi phi, B)."""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import ndimage

from supremal.calculus import rank_one_variation
from supremal.functional import RadiusPolicy, ball_family, e_infty, supremal_value
from supremal.grid import GridField, SubdomainMask
from supremal.hamiltonian import HamiltonianSpec
from supremal.tensor import unit_vector
from supremal.utilities.constants import KAPPA
from supremal.utilities.events import HypothesisGateEvent, emit
from supremal.utilities.errors import ErrorMessages, InvalidInputError
from supremal.verify.gate import HypothesisReport, hypothesis_gate

logger = logging.getLogger(__name__)


class BallComparison(BaseModel):
    center: List[float]
    rho: float = Field(description="Ball radius")
    rhs: float = Field(description="E_inf(u + xi phi, B)")
    kind: str = Field(description="Extremum kind of phi at the center")


class VerifyReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lhs: float = Field(description="E_inf(u, mask)")
    lhs_point: List[float] = Field(description="Where H(x, Du) attains lhs")
    balls: List[BallComparison]
    inf_rhs: float
    margin: float = Field(description="inf_rhs - lhs")
    tol: float
    passed: bool = Field(alias="pass")
    hypothesis: HypothesisReport
    seed: Optional[int] = None
    xi: List[float]
    mask: str
    grid: Dict[str, Any] = Field(description="Spacing and shape of the grid")

    @model_validator(mode="after")
    def check_consistent(self) -> "VerifyReport":
        values = [self.lhs, self.inf_rhs, self.margin, self.tol] + [b.rhs for b in self.balls]
        if not np.all(np.isfinite(values)):
            raise ValueError(ErrorMessages.format_error(ErrorMessages.NON_FINITE, "report"))
        if self.passed != (self.margin >= -self.tol):
            raise ValueError(
                f"pass={self.passed} disagrees with margin {self.margin} and tol {self.tol}"
            )
        return self

    @property
    def margin_in_h(self) -> float:
        return self.margin / self.grid["h"]

    @property
    def status(self) -> str:
        if not self.hypothesis.met:
            return "hypothesis not met"
        return "minimality holds" if self.passed else "minimality violated"


def default_tolerance(h: float, lipschitz: float) -> float:
    """KAPPA h (1 + Lip(u)), the discretisation slack of a true minimiser."""
    return KAPPA * h * (1.0 + lipschitz)


def _fits_a_ball(mask: SubdomainMask, index: Sequence[int], h: float) -> bool:
    # the smallest contained ball needs two cells of room
    depth = ndimage.distance_transform_edt(mask.flags, sampling=h)
    return bool(depth[tuple(index)] >= 2 * h - 1e-12)


def compare_balls(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    xi: Sequence[float],
    phi: GridField,
    policy: Optional[RadiusPolicy] = None,
    use_analytic: bool = False,
) -> tuple[float, List[float], List[BallComparison]]:
    """``(lhs, lhs_point, per-ball comparisons)`` without the hypothesis gate."""
    lhs = supremal_value(H, u, mask, use_analytic)
    anchor = lhs.argmax_point if _fits_a_ball(mask, lhs.argmax_index, u.domain.h) else None
    family = ball_family(phi, mask, policy, anchor=anchor)
    competitor = rank_one_variation(u, xi, phi)
    balls = [
        BallComparison(
            center=ball.center,
            rho=ball.radius,
            rhs=e_infty(H, competitor, ball.mask, use_analytic),
            kind=ball.kind,
        )
        for ball in family.balls
    ]
    return lhs.value, lhs.argmax_point, balls


def minimality_check(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    xi: Sequence[float],
    phi: GridField,
    tol: Optional[float] = None,
    c: Optional[float] = None,
    seed: Optional[int] = None,
    policy: Optional[RadiusPolicy] = None,
    use_analytic: bool = False,
    emit_events: bool = True,
) -> VerifyReport:
    """Test the minimality inequality for one rank-one variation ``u + xi phi``.

    Both sides are computed even when the hypothesis gate fails, so negative
    controls still report their margin; ``status`` then says the hypothesis is
    not met instead of claiming anything about minimality.
    """
    direction, _ = unit_vector(xi)
    if direction.size != u.N:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"xi of length {direction.size}")
        )
    gate = hypothesis_gate(H, u, mask, c=c, use_analytic=use_analytic)
    if emit_events:
        emit(
            minimality_check,
            HypothesisGateEvent(
                check="minimality",
                hj_residual=gate.hj_residual,
                tau=gate.tau,
                c1_proxy_ok=gate.c1_proxy_ok,
                met=gate.met,
            ),
        )
    lhs, lhs_point, balls = compare_balls(H, u, mask, direction, phi, policy, use_analytic)
    tolerance = default_tolerance(u.domain.h, gate.lipschitz) if tol is None else float(tol)
    inf_rhs = min(b.rhs for b in balls)
    margin = inf_rhs - lhs
    report = VerifyReport(
        lhs=lhs,
        lhs_point=lhs_point,
        balls=balls,
        inf_rhs=inf_rhs,
        margin=margin,
        tol=tolerance,
        passed=margin >= -tolerance,
        hypothesis=gate,
        seed=seed,
        xi=direction.tolist(),
        mask=mask.label,
        grid={"h": u.domain.h, "shape": list(u.domain.shape)},
    )
    logger.debug(
        f"Minimality on '{mask.label}': lhs={lhs:.6g} inf_rhs={inf_rhs:.6g} "
        f"margin={margin:.3g} tol={tolerance:.3g} ({report.status})"
    )
    return report
