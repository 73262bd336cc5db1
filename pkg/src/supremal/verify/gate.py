"""Hypothesis gate: does u solve H(x, Du) = c on the mask, and is Du continuous?"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from supremal.calculus import hj_residual
from supremal.functional import e_infty
from supremal.grid import GridField, SubdomainMask, gradient_at
from supremal.hamiltonian import HamiltonianSpec
from supremal.tensor import frobenius_norm
from supremal.utilities.constants import C1_JUMP_BUDGET, NEAR_MISS_FRACTION, PDE_TAU_FACTOR

logger = logging.getLogger(__name__)


class HypothesisReport(BaseModel):
    hj_residual: float = Field(description="max |H(x, Du) - c| over the mask")
    tau: float = Field(description="Residual threshold PDE_TAU_FACTOR h (1 + Lip)")
    c1_proxy_ok: bool = Field(description="Neighbouring gradient jumps within budget")
    met: bool
    near_miss: bool = Field(description="Met, but the residual exceeds half the threshold")
    level: float = Field(description="The level c")
    lipschitz: float = Field(description="Largest |Du| on the mask")
    worst_jump: float
    jump_budget: float
    jump_point: Optional[List[float]] = None
    residual_point: List[float]

    def diagnostic(self) -> str:
        if self.met:
            return "hypothesis met"
        reasons = []
        if self.hj_residual > self.tau:
            reasons.append(
                f"HJ residual {self.hj_residual:.3g} exceeds tau {self.tau:.3g} "
                f"at {self.residual_point} for c={self.level:g}"
            )
        if not self.c1_proxy_ok:
            reasons.append(
                f"gradient jump {self.worst_jump:.3g} exceeds budget {self.jump_budget:.3g} "
                f"near {self.jump_point}"
            )
        return "; ".join(reasons)


def gradient_jumps(
    u: GridField, mask: SubdomainMask, use_analytic: bool = False
) -> tuple[float, Optional[List[float]], float]:
    """Largest |Du(i) - Du(j)| over axis-neighbouring masked pairs, its midpoint, and sup |Du|."""
    idx = mask.indices()
    grads = gradient_at(u, idx, use_analytic=use_analytic)
    sup = float(frobenius_norm(grads).max())
    lookup = np.full(mask.shape, -1, dtype=int)
    lookup[tuple(idx.T)] = np.arange(idx.shape[0])

    worst, where = 0.0, None
    for axis in range(mask.flags.ndim):
        step = np.zeros(mask.flags.ndim, dtype=int)
        step[axis] = 1
        ahead = idx + step
        inside = ahead[:, axis] < mask.shape[axis]
        partner = np.full(idx.shape[0], -1)
        partner[inside] = lookup[tuple(ahead[inside].T)]
        pairs = np.flatnonzero(partner >= 0)
        if pairs.size == 0:
            continue
        jumps = frobenius_norm(grads[pairs] - grads[partner[pairs]])
        k = int(np.argmax(jumps))
        if jumps[k] > worst:
            worst = float(jumps[k])
            a, b = idx[pairs[k]], idx[partner[pairs[k]]]
            where = (0.5 * (u.domain.point(a) + u.domain.point(b))).tolist()
    return worst, where, sup


def hypothesis_gate(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    c: Optional[float] = None,
    use_analytic: bool = False,
    tau: Optional[float] = None,
) -> HypothesisReport:
    """Grid version of "u is a C^1 solution of H(x, Du) = c".

    ``c`` defaults to E_inf(u, mask). The C^1 proxy compares finite-difference
    gradients of axis neighbours against C1_JUMP_BUDGET max(1, sup |Du|).
    """
    level = e_infty(H, u, mask, use_analytic) if c is None else float(c)
    residual = hj_residual(H, u, mask, level, use_analytic=use_analytic)
    worst, where, sup = gradient_jumps(u, mask, use_analytic)
    h = u.domain.h
    threshold = PDE_TAU_FACTOR * h * (1.0 + sup) if tau is None else float(tau)
    budget = C1_JUMP_BUDGET * max(1.0, sup)
    c1_ok = worst <= budget
    met = residual.sup <= threshold and c1_ok
    report = HypothesisReport(
        hj_residual=residual.sup,
        tau=threshold,
        c1_proxy_ok=c1_ok,
        met=met,
        near_miss=met and residual.sup > NEAR_MISS_FRACTION * threshold,
        level=level,
        lipschitz=sup,
        worst_jump=worst,
        jump_budget=budget,
        jump_point=where,
        residual_point=residual.worst_point,
    )
    if not met:
        logger.info(f"Hypothesis gate failed on '{mask.label}': {report.diagnostic()}")
    return report
