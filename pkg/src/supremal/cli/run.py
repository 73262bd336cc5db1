import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.calculus import (
    ResidualMap,
    ResidualReport,
    hj_residual,
    observed_order,
    residual_sweep,
)
from supremal.cli.config import CheckName, Problem, RunConfig, resolve
from supremal.cli.constants import CHECKS
from supremal.cli.plot_data import emit_plot_data
from supremal.functional import e_infty
from supremal.hamiltonian import (
    ConvexityVerdict,
    check_level_convexity,
    check_rank_one_level_convexity,
    psi_section,
)
from supremal.mollify import ConvergenceTable, build_partition, build_shells, convergence_check
from supremal.utilities.constants import EXIT_FAIL, EXIT_PASS, EXIT_WARN
from supremal.utilities.errors import ConfigError, SupremalError
from supremal.utilities.events import (
    CheckErrorEvent,
    CheckFinishedEvent,
    CheckStartedEvent,
    emit,
)
from supremal.utilities.logger import Logger
from supremal.utilities.report_json_encoder import write_report
from supremal.verify import (
    JensenResult,
    JensenTrials,
    SuiteConfig,
    annulus_control,
    falsify,
    jensen_trials,
    random_direction,
    rank_one_am_suite,
    section_of,
)

logger = logging.getLogger(__name__)

CheckStatus = Literal["pass", "warn", "fail"]


class ResidualRow(BaseModel):
    h: float
    sup: float
    sup_unflagged: Optional[float] = None
    points: int
    flagged: int


class ResidualStudy(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: str
    rows: List[ResidualRow] = Field(description="One row per spacing, coarse to fine")
    fitted_order: Optional[float] = Field(description="Log-log slope of sup against h")
    finest: ResidualReport
    heat_map: Optional[ResidualMap] = Field(default=None, exclude=True)


class ConvexityStudy(BaseModel):
    rank_one: ConvexityVerdict
    sections: List[ConvexityVerdict] = Field(
        default_factory=list, description="Level-convexity of p -> H(x, xi (x) p + [xi]perp F)"
    )
    section_points: List[Dict[str, Any]] = Field(default_factory=list)


class MollifyStudy(BaseModel):
    epsilons: List[float]
    table: ConvergenceTable


class JensenStudy(BaseModel):
    trials: JensenTrials
    control: JensenResult = Field(description="Non-level-convex control, expected to fail")


class CheckResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    check: CheckName
    status: CheckStatus
    warnings: List[str] = Field(default_factory=list)
    report: Any
    report_path: Optional[Path] = None
    plot_files: List[Path] = Field(default_factory=list)


Outcome = Tuple[Any, CheckStatus, List[str]]


def _status(passed: bool, warnings: List[str]) -> CheckStatus:
    if not passed:
        return "fail"
    return "warn" if warnings else "pass"


def _minimality(config: RunConfig, problem: Problem) -> Outcome:
    options = config.minimality
    report = rank_one_am_suite(
        problem.H,
        problem.u,
        problem.mask,
        SuiteConfig(
            trials=options.trials,
            seed=config.seed,
            max_bumps=options.max_bumps,
            local_trials=options.local_trials,
            c=config.c,
            tol=config.tol,
            use_analytic=config.use_analytic,
            workers=config.workers,
        ),
    )
    warnings = list(report.warnings)
    if report.aborted:
        warnings.append(report.diagnostic)
    return report, _status(report.passed, report.warnings), warnings


def _falsify(config: RunConfig, problem: Problem) -> Outcome:
    options = config.falsify
    report = falsify(
        problem.H,
        problem.u,
        problem.mask,
        budget=options.budget,
        seed=config.seed,
        tol=config.tol,
        levels=options.levels,
        use_analytic=config.use_analytic,
        workers=config.workers,
    )
    warnings = []
    if report.found != options.expect_witness:
        expected = "a witness" if options.expect_witness else "no witness"
        warnings.append(f"expected {expected}, best gap {report.best_gap}")
    return report, _status(report.found == options.expect_witness, []), warnings


def _convexity(config: RunConfig, problem: Problem) -> Outcome:
    options = config.convexity
    H = problem.H
    lower = np.asarray(problem.u.domain.lower)
    upper = np.asarray(problem.u.domain.upper)

    def sampler(rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(lower, upper, size=(count, H.n))

    rank_one = check_rank_one_level_convexity(
        H,
        x_sampler=sampler if H.depends_on_x else None,
        segments=options.segments,
        seed=config.seed,
        scale=options.scale,
        workers=config.workers,
    )
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 3]))
    sections, points = [], []
    for k in range(options.sections):
        x = sampler(rng, 1)[0]
        xi = random_direction(rng, H.N)
        F = options.scale * rng.standard_normal(H.dims)
        sections.append(
            check_level_convexity(
                psi_section(H, x, xi, F),
                H.n,
                samples=options.section_samples,
                seed=config.seed + k + 1,
                scale=options.scale,
            )
        )
        points.append({"x": x.tolist(), "xi": xi.tolist(), "F": F.tolist()})
    verdicts = [rank_one] + sections
    warnings = [
        f"inconclusive verdict, worst violation {v.worst_violation:.3g}"
        for v in verdicts
        if v.status == "inconclusive"
    ]
    passed = all(v.status != "fail" for v in verdicts)
    study = ConvexityStudy(rank_one=rank_one, sections=sections, section_points=points)
    return study, _status(passed, warnings), warnings


def _residual(config: RunConfig, problem: Problem) -> Outcome:
    options = config.residual
    if config.field.csv is not None:
        hs = [problem.u.domain.h]
    else:
        hs = sorted({config.grid.h, *options.hs}, reverse=True)
    rows, finest, heat_map = [], None, None
    for h in hs:
        current = problem if h == problem.u.domain.h else resolve(config, h)
        if options.kind == "hj":
            c = config.c
            if c is None:
                c = e_infty(current.H, current.u, current.mask, config.use_analytic)
            report = hj_residual(current.H, current.u, current.mask, c, config.use_analytic)
            residual_map = None
        else:
            report, residual_map = residual_sweep(
                current.u,
                current.mask,
                kind=options.kind,
                use_analytic=config.use_analytic,
                workers=config.workers,
            )
        rows.append(
            ResidualRow(
                h=h,
                sup=report.sup,
                sup_unflagged=report.sup_unflagged,
                points=report.points,
                flagged=report.flagged,
            )
        )
        finest, heat_map = report, residual_map
    order = observed_order([r.h for r in rows], [r.sup for r in rows])
    study = ResidualStudy(
        kind=options.kind,
        rows=rows,
        fitted_order=order,
        finest=finest,
        heat_map=heat_map if options.heat_map else None,
    )
    warnings = []
    if options.max_residual is not None:
        sup = finest.sup if finest.sup_unflagged is None else finest.sup_unflagged
        if sup > options.max_residual:
            warnings.append(f"sup residual {sup:.3g} exceeds {options.max_residual:.3g}")
    if options.min_order is not None and (order is None or order < options.min_order):
        warnings.append(f"observed order {order} below {options.min_order}")
    return study, _status(not warnings, []), warnings


def _mollify(config: RunConfig, problem: Problem) -> Outcome:
    options = config.mollify
    domain, mask = problem.u.domain, problem.mask
    probe = build_shells(domain, mask, d0=options.d0, max_shells=options.max_shells)
    d0 = probe.d0
    epsilons = options.epsilons or [d0 / 2, d0 / 4, d0 / 8]
    shells = build_shells(
        domain, mask, d0=d0, max_shells=options.max_shells, finest_radius=epsilons[-1]
    )
    table = convergence_check(
        problem.u, problem.xi, epsilons, shells, build_partition(shells)
    )
    warnings = [] if table.monotone else ["sup differences do not shrink with epsilon"]
    study = MollifyStudy(epsilons=epsilons, table=table)
    return study, _status(table.all_satisfied, warnings), warnings


def _jensen(config: RunConfig, problem: Problem) -> Outcome:
    H = problem.H
    trials = jensen_trials(
        section_of(H),
        dim=H.N * H.n,
        trials=config.jensen.trials,
        support=config.jensen.support,
        seed=config.seed,
    )
    study = JensenStudy(trials=trials, control=annulus_control())
    return study, _status(trials.passed, []), []


CHECK_RUNNERS: Dict[str, Callable[[RunConfig, Problem], Outcome]] = {
    "minimality": _minimality,
    "falsify": _falsify,
    "convexity": _convexity,
    "residual": _residual,
    "mollify-demo": _mollify,
    "jensen": _jensen,
}


def run_check(config: RunConfig, problem: Problem, check: CheckName) -> CheckResult:
    """Run one check, write its JSON report (with the resolved config) and plot data."""
    emit(run_check, CheckStartedEvent(check=check, seed=config.seed))
    stopped = False
    try:
        report, status, warnings = CHECK_RUNNERS[check](config, problem)
    except ConfigError:
        raise
    except SupremalError as e:
        error = type(e).__name__
        logger.error(f"{check} stopped: {error}: {e}")
        emit(run_check, CheckErrorEvent(check=check, error=error, message=str(e)))
        report, status, warnings = {"error": error, "message": str(e)}, "fail", [str(e)]
        stopped = True
    path = config.out / CHECKS[check]["report"]
    payload = {
        "check": check,
        "status": status,
        "warnings": warnings,
        "config": config.model_dump(mode="json"),
        "report": report,
    }
    write_report(payload, path)
    plots = emit_plot_data(check, report, config.out) if config.plot_data and not stopped else []
    emit(
        run_check,
        CheckFinishedEvent(
            check=check, passed=status != "fail", warnings=warnings, report_path=str(path)
        ),
    )
    return CheckResult(
        check=check,
        status=status,
        warnings=warnings,
        report=report,
        report_path=path,
        plot_files=plots,
    )


def run(
    config: RunConfig, verbose: bool = False, problem: Optional[Problem] = None
) -> List[CheckResult]:
    """Execute every check the config selects, in order, on one resolved problem.

    A check that stops on a ``SupremalError`` is reported as failed and the
    remaining checks still run; ``ConfigError`` propagates.
    """
    printer = Logger(verbose=verbose, scope="run")
    if problem is None:
        problem = resolve(config)
    results = []
    for done, check in enumerate(config.checks):
        printer.progress(
            done, len(config.checks), f"running {check}: {CHECKS[check]['description']}"
        )
        result = run_check(config, problem, check)
        color = {"pass": "bold_green", "warn": "bold_yellow", "fail": "bold_red"}[result.status]
        printer.log("info", f"{check}: {result.status}", color=color)
        results.append(result)
    return results


def exit_status(results: List[CheckResult]) -> int:
    statuses = {r.status for r in results}
    if "fail" in statuses:
        return EXIT_FAIL
    if "warn" in statuses:
        return EXIT_WARN
    return EXIT_PASS
