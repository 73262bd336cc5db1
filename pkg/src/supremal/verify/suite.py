"""Randomized rank-one absolute-minimiser suite: many minimality checks, one verdict."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from supremal.calculus import BumpSpec, make_bumps, rank_one_variation, zero_field
from supremal.functional import LocalFunctional, RadiusPolicy, local_functional
from supremal.grid import GridField, SubdomainMask
from supremal.hamiltonian import HamiltonianSpec
from supremal.utilities.constants import (
    DEFAULT_MAX_BUMPS,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    LOCAL_RADIUS_CELLS,
)
from supremal.utilities.errors import ContainmentError, ParameterError
from supremal.utilities.events import HypothesisGateEvent, emit
from supremal.utilities.logger import Logger
from supremal.verify.gate import HypothesisReport, hypothesis_gate
from supremal.verify.minimality import VerifyReport, default_tolerance, minimality_check
from supremal.verify.sampling import random_bumps, random_direction, random_sub_mask

logger = logging.getLogger(__name__)


class SuiteConfig(BaseModel):
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    seed: int = Field(default=DEFAULT_SEED)
    max_bumps: int = Field(default=DEFAULT_MAX_BUMPS, ge=1)
    whole_mask_probability: float = Field(
        default=0.5, ge=0.0, le=1.0, description="Chance a trial uses the whole mask"
    )
    c: Optional[float] = Field(default=None, description="Claimed level, E_inf(u) when unset")
    tol: Optional[float] = Field(default=None, description="KAPPA h (1 + Lip) when unset")
    local_trials: int = Field(
        default=3, ge=0, description="Trials that also record a local-functional sequence"
    )
    policy: RadiusPolicy = Field(default_factory=RadiusPolicy)
    use_analytic: bool = False
    workers: Optional[int] = None
    verbose: bool = False


class TrialOutcome(BaseModel):
    trial: int
    mask: str
    xi: List[float]
    bumps: List[BumpSpec]
    lhs: float
    inf_rhs: float
    margin: float
    margin_in_h: float
    passed: bool
    hypothesis_met: bool
    local: Optional[LocalFunctional] = None
    local_margin: Optional[float] = Field(
        default=None, description="Local-functional limit estimate minus lhs"
    )


class SuiteReport(BaseModel):
    trials: int
    passes: int
    pass_rate: float
    worst_margin: Optional[float] = None
    worst_margin_in_h: Optional[float] = None
    within_two_h: Optional[float] = Field(
        default=None, description="Fraction of margins >= -2h"
    )
    tol: float
    gate: HypothesisReport
    aborted: bool = False
    diagnostic: str = ""
    warnings: List[str] = Field(default_factory=list)
    seed: int
    outcomes: List[TrialOutcome] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.aborted and self.passes == self.trials


def _local_radii(radius: float, h: float) -> List[float]:
    cells = int(np.floor(radius / h + 1e-9))
    out: List[int] = []
    while cells >= LOCAL_RADIUS_CELLS:
        out.append(cells)
        cells //= 2
    if out and out[-1] > LOCAL_RADIUS_CELLS:
        out.append(LOCAL_RADIUS_CELLS)
    return [k * h for k in out]


def _local_sequence(
    H: HamiltonianSpec,
    competitor: GridField,
    sub: SubdomainMask,
    report: VerifyReport,
    use_analytic: bool,
) -> tuple[Optional[LocalFunctional], Optional[float]]:
    """Shrinking balls around the center of the ball attaining inf_rhs."""
    ball = min(report.balls, key=lambda b: b.rhs)
    radii = _local_radii(ball.rho, competitor.domain.h)
    if not radii:
        return None, None
    try:
        local = local_functional(
            H, competitor, ball.center, radii, parent=sub, use_analytic=use_analytic
        )
    except ContainmentError:
        logger.debug(f"Local balls around {ball.center} leave '{sub.label}'")
        return None, None
    limit = local.extrapolated if local.extrapolated is not None else local.values[-1]
    return local, limit - report.lhs


def rank_one_am_suite(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    config: Optional[SuiteConfig] = None,
) -> SuiteReport:
    """Run ``minimality_check`` over random sub-masks, directions and bump sums.

    The hypothesis gate runs once on the whole mask first; when it fails the
    suite aborts with the gate's diagnostic and runs no trials. Trial k draws
    from the k-th child of ``SeedSequence(seed)``, so the report is the same
    for any number of workers.
    """
    config = config or SuiteConfig()
    printer = Logger(verbose=config.verbose, scope="suite")
    h = u.domain.h
    gate = hypothesis_gate(H, u, mask, c=config.c, use_analytic=config.use_analytic)
    emit(
        rank_one_am_suite,
        HypothesisGateEvent(
            check="suite",
            hj_residual=gate.hj_residual,
            tau=gate.tau,
            c1_proxy_ok=gate.c1_proxy_ok,
            met=gate.met,
        ),
    )
    tolerance = default_tolerance(h, gate.lipschitz) if config.tol is None else config.tol
    if tolerance < 0:
        raise ParameterError(f"Tolerance must be nonnegative, got {tolerance}")
    if not gate.met:
        diagnostic = f"suite aborted: {gate.diagnostic()}"
        logger.warning(diagnostic)
        printer.log("warning", diagnostic, color="red")
        return SuiteReport(
            trials=0,
            passes=0,
            pass_rate=0.0,
            tol=tolerance,
            gate=gate,
            aborted=True,
            diagnostic=diagnostic,
            seed=config.seed,
        )

    children = np.random.SeedSequence(config.seed).spawn(config.trials)

    def run_trial(k: int) -> TrialOutcome:
        rng = np.random.default_rng(children[k])
        sub = random_sub_mask(rng, u.domain, mask, config.whole_mask_probability)
        xi = random_direction(rng, u.N)
        bumps = random_bumps(rng, u.domain, sub, config.max_bumps)
        phi = make_bumps(bumps, u.domain, mask=sub) if bumps else zero_field(u.domain)
        report = minimality_check(
            H,
            u,
            sub,
            xi,
            phi,
            tol=tolerance,
            c=config.c,
            seed=config.seed,
            policy=config.policy,
            use_analytic=config.use_analytic,
            emit_events=False,
        )
        local, local_margin = None, None
        if k < config.local_trials:
            competitor = rank_one_variation(u, xi, phi)
            local, local_margin = _local_sequence(H, competitor, sub, report, config.use_analytic)
        printer.progress(
            k + 1, config.trials, f"margin {report.margin_in_h:+.3f}h on '{sub.label}'"
        )
        return TrialOutcome(
            trial=k,
            mask=sub.label,
            xi=report.xi,
            bumps=bumps,
            lhs=report.lhs,
            inf_rhs=report.inf_rhs,
            margin=report.margin,
            margin_in_h=report.margin_in_h,
            passed=report.passed,
            hypothesis_met=report.hypothesis.met,
            local=local,
            local_margin=local_margin,
        )

    if config.workers and config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run_trial, range(config.trials)))
    else:
        outcomes = [run_trial(k) for k in range(config.trials)]

    margins = np.array([o.margin for o in outcomes])
    passes = sum(o.passed for o in outcomes)
    warnings = []
    if gate.near_miss:
        warnings.append(
            f"hypothesis gate near miss: residual {gate.hj_residual:.3g}, tau {gate.tau:.3g}"
        )
    worst = float(margins.min())
    logger.info(f"Suite: {passes}/{config.trials} passed, worst margin {worst / h:+.3f}h")
    return SuiteReport(
        trials=config.trials,
        passes=passes,
        pass_rate=passes / config.trials,
        worst_margin=worst,
        worst_margin_in_h=worst / h,
        within_two_h=float(np.mean(margins >= -2 * h)),
        tol=tolerance,
        gate=gate,
        warnings=warnings,
        seed=config.seed,
        outcomes=outcomes,
    )
