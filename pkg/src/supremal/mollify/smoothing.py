"""Shell-wise mollification of the xi-component, its modulus and extremum tracking."""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from supremal.grid import GridField, SubdomainMask, interior_extrema
from supremal.grid.extrema import ExtremumKind
from supremal.mollify.kernel import MollifierKernel
from supremal.mollify.shells import PartitionOfUnity, ShellDecomposition
from supremal.tensor import dir_projections
from supremal.utilities.constants import CONVERGENCE_TOL, MIN_RING_CELLS
from supremal.utilities.errors import (
    ErrorMessages,
    InvalidInputError,
    ParameterError,
    ResolutionError,
)

logger = logging.getLogger(__name__)

_TAUS_PER_T = 6


class SmoothingResult(BaseModel):
    """psi^eps split into its smoothed xi-part and the untouched orthogonal part."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    field: GridField
    along: np.ndarray = Field(description="xi . psi^eps per grid point")
    across: np.ndarray = Field(description="[xi]-perp psi, copied from the input")
    epsilon: float
    radii: List[float] = Field(description="Kernel radius eps / k per shell")
    xi: List[float]


def _extended_values(
    psi: GridField, mask: SubdomainMask, base: Optional[GridField]
) -> np.ndarray:
    if base is None:
        return psi.values
    if base.values.shape != psi.values.shape:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"base {base.values.shape} vs psi {psi.values.shape}"
            )
        )
    return np.where(mask.flags[..., np.newaxis], psi.values, base.values)


def _check_setup(
    psi: GridField, xi: Sequence[float], shells: ShellDecomposition, partition: PartitionOfUnity
) -> np.ndarray:
    pair = dir_projections(xi)
    if pair.xi.size != psi.N:
        raise InvalidInputError(
            ErrorMessages.format_error(
                ErrorMessages.DIMENSION, f"xi in R^{pair.xi.size}, N={psi.N}"
            )
        )
    if psi.domain.shape != shells.domain.shape or partition.K != shells.K:
        raise InvalidInputError("psi, shells and partition must share one grid and one K")
    return pair.xi


def _shell_kernels(shells: ShellDecomposition, epsilon: float) -> List[MollifierKernel]:
    h = shells.domain.h
    if not 0 < epsilon < shells.d0:
        raise ParameterError(f"epsilon must lie in (0, d0={shells.d0}), got {epsilon}")
    finest = epsilon / shells.K
    if finest < MIN_RING_CELLS * h * (1 - 1e-9):
        raise ResolutionError(
            f"Finest kernel radius eps/K = {finest} is below {MIN_RING_CELLS}h; "
            "raise epsilon or cap max_shells"
        )
    return [
        MollifierKernel(radius=epsilon / k, h=h, dim=shells.domain.dim)
        for k in range(1, shells.K + 1)
    ]


def smooth(
    psi: GridField,
    xi: Sequence[float],
    epsilon: float,
    shells: ShellDecomposition,
    partition: PartitionOfUnity,
    base: Optional[GridField] = None,
) -> SmoothingResult:
    """psi^eps = xi (x) sum_k zeta_k ((xi . psi) * eta^{eps/k}) + [xi]-perp psi.

    ``base`` replaces psi outside the working mask before convolving; outside
    the mask psi^eps equals the (extended) psi.
    """
    direction = _check_setup(psi, xi, shells, partition)
    kernels = _shell_kernels(shells, epsilon)
    flags = shells.mask.flags
    values = _extended_values(psi, shells.mask, base)

    pair = dir_projections(direction)
    scalar = values @ direction
    across = values @ pair.perp.T

    mixed = np.zeros(flags.shape)
    for k, kernel in enumerate(kernels):
        zeta = partition.weights[k]
        if not zeta.any():
            continue
        mixed += zeta * kernel.apply(scalar)

    along = np.where(flags, mixed, scalar)
    smoothed = values.copy()
    smoothed[flags] = direction * along[flags][:, np.newaxis] + across[flags]
    return SmoothingResult(
        field=psi.with_values(smoothed, name=f"{psi.name}^eps"),
        along=along,
        across=across,
        epsilon=float(epsilon),
        radii=[k.radius for k in kernels],
        xi=direction.tolist(),
    )


def _scalar_part(psi: GridField, xi: Optional[Sequence[float]]) -> np.ndarray:
    if xi is None:
        return psi.scalar()
    direction = dir_projections(xi).xi
    if direction.size != psi.N:
        raise InvalidInputError(
            ErrorMessages.format_error(ErrorMessages.DIMENSION, f"xi in R^{direction.size}")
        )
    return psi.values @ direction


def _deviation(scalar: np.ndarray, tau: float, h: float, flags: np.ndarray) -> float:
    kernel = MollifierKernel(radius=tau, h=h, dim=scalar.ndim)
    return float(np.max(np.abs(kernel.apply(scalar) - scalar)[flags]))


class ModulusTable(BaseModel):
    """Nondecreasing table of omega(t) = sup_{tau <= t} max |psi * eta^tau - psi|."""

    t: List[float]
    omega: List[float]
    taus: List[float] = Field(description="Every kernel radius evaluated")
    deviations: List[float] = Field(description="max |psi * eta^tau - psi| per tau")
    omega_at_zero: float = Field(description="Linear extrapolation of omega to t = 0")

    def __call__(self, t: float) -> float:
        """omega at an arbitrary t, from the tabulated radii not exceeding t."""
        eligible = [d for tau, d in zip(self.taus, self.deviations) if tau <= t * (1 + 1e-12)]
        return max(eligible, default=0.0)


def modulus(
    psi: GridField,
    t_grid: Sequence[float],
    mask: SubdomainMask,
    xi: Optional[Sequence[float]] = None,
    extra_taus: Sequence[float] = (),
) -> ModulusTable:
    """Tabulate the mollification modulus of ``psi`` (or of ``xi . psi``) on ``mask``.

    Radii are sampled geometrically below each t down to the two-cell limit.
    """
    h = psi.domain.h
    scalar = _scalar_part(psi, xi)
    ts = sorted(float(t) for t in t_grid)
    if not ts or ts[0] <= 0:
        raise ParameterError(f"t_grid must hold positive values, got {list(t_grid)}")

    floor = MIN_RING_CELLS * h
    taus = set(float(t) for t in extra_taus if t > 0)
    for t in ts:
        for j in range(_TAUS_PER_T):
            tau = t * 2.0 ** (-j / 2)
            if tau < floor * (1 - 1e-9):
                break
            taus.add(tau)
    ordered = sorted(taus)
    deviations = [_deviation(scalar, tau, h, mask.flags) for tau in ordered]
    running = list(np.maximum.accumulate(deviations)) if deviations else []

    def omega(t: float) -> float:
        k = np.searchsorted(ordered, t * (1 + 1e-12), side="right")
        return float(running[k - 1]) if k > 0 else 0.0

    table = [omega(t) for t in ts]
    at_zero = table[0]
    if len(ts) >= 2 and ts[1] > ts[0]:
        slope = (table[1] - table[0]) / (ts[1] - ts[0])
        at_zero = max(table[0] - slope * ts[0], 0.0)
    return ModulusTable(
        t=ts,
        omega=table,
        taus=ordered,
        deviations=deviations,
        omega_at_zero=float(at_zero),
    )


class ConvergenceRow(BaseModel):
    epsilon: float
    ring: int
    measured: float = Field(description="max |psi^eps - psi| over the ring")
    bound: float
    satisfied: bool
    sharp: bool = Field(description="Measured value within a factor 3 of the bound")


class ConvergenceTable(BaseModel):
    rows: List[ConvergenceRow]
    shells: Dict[str, Any] = Field(description="Summary of the shell decomposition")
    monotone: bool = Field(description="Sup over rings shrinks with epsilon")
    omega: ModulusTable

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)

    def sup_by_epsilon(self) -> List[Tuple[float, float]]:
        out: Dict[float, float] = {}
        for r in self.rows:
            out[r.epsilon] = max(out.get(r.epsilon, 0.0), r.measured)
        return sorted(out.items(), reverse=True)

    def to_csv(self) -> str:
        lines = ["epsilon,ring,measured,bound,satisfied"]
        for r in self.rows:
            lines.append(f"{r.epsilon!r},{r.ring},{r.measured!r},{r.bound!r},{int(r.satisfied)}")
        return "\n".join(lines) + "\n"


def convergence_check(
    psi: GridField,
    xi: Sequence[float],
    epsilons: Sequence[float],
    shells: ShellDecomposition,
    partition: PartitionOfUnity,
    base: Optional[GridField] = None,
    tol: float = CONVERGENCE_TOL,
) -> ConvergenceTable:
    """Measured ring-wise sup differences against 3 omega(eps / (l - 1)) (2 omega(eps) on V_1)."""
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ParameterError("convergence_check needs at least one epsilon")
    if any(a <= b for a, b in zip(eps, eps[1:])):
        raise ParameterError(f"epsilons must be strictly decreasing, got {eps}")

    direction = _check_setup(psi, xi, shells, partition)
    extended = psi.with_values(_extended_values(psi, shells.mask, base))
    radii = [e / k for e in eps for k in range(1, shells.K + 1)]
    omega = modulus(extended, [eps[0]], shells.mask, xi=direction, extra_taus=radii)

    rows: List[ConvergenceRow] = []
    for e in eps:
        result = smooth(extended, direction, e, shells, partition)
        diff = np.linalg.norm(result.field.values - extended.values, axis=-1)
        for ring_number, ring in enumerate(shells.rings, start=1):
            measured = float(diff[ring].max()) if ring.any() else 0.0
            if ring_number == 1:
                bound = 2.0 * omega(e)
            else:
                bound = 3.0 * omega(e / (ring_number - 1))
            rows.append(
                ConvergenceRow(
                    epsilon=e,
                    ring=ring_number,
                    measured=measured,
                    bound=bound,
                    satisfied=measured <= bound + tol,
                    sharp=bound > 0 and 3.0 * measured >= bound,
                )
            )

    sups = [max(r.measured for r in rows if r.epsilon == e) for e in eps]
    table = ConvergenceTable(
        rows=rows,
        shells=shells.summary(),
        monotone=all(b <= a + tol for a, b in zip(sups, sups[1:])),
        omega=omega,
    )
    failed = [r for r in rows if not r.satisfied]
    if failed:
        logger.warning(f"{len(failed)} ring bounds violated, first: {failed[0].model_dump()}")
    return table


class TrackStep(BaseModel):
    point: Optional[List[float]] = Field(description="Tracked extremum, None when none matched")
    deviation: Optional[float] = None
    value: Optional[float] = None


class TrackingReport(BaseModel):
    x0: List[float]
    kind: ExtremumKind
    steps: List[TrackStep]
    max_deviation: Optional[float]
    inside_half_ball: Optional[bool] = Field(
        default=None, description="Every tracked point within rho / 2 of x0"
    )
    failed: bool = Field(description="Some field had no extremum of the requested kind")


def track_extremum(
    fields: Sequence[GridField],
    mask: SubdomainMask,
    x0: Sequence[float],
    kind: ExtremumKind = "max",
    rho: Optional[float] = None,
) -> TrackingReport:
    """Follow the extremum of kind ``kind`` nearest to ``x0`` through a sequence of fields."""
    anchor = np.asarray(x0, dtype=float)
    steps: List[TrackStep] = []
    for phi in fields:
        candidates = [e for e in interior_extrema(phi, mask) if e.matches(kind)]
        if not candidates:
            logger.info(f"No {kind} of '{phi.name}' to track")
            steps.append(TrackStep(point=None))
            continue
        best = min(candidates, key=lambda e: float(np.linalg.norm(np.asarray(e.point) - anchor)))
        steps.append(
            TrackStep(
                point=best.point,
                deviation=float(np.linalg.norm(np.asarray(best.point) - anchor)),
                value=best.value,
            )
        )
    deviations = [s.deviation for s in steps if s.deviation is not None]
    max_dev = max(deviations) if deviations else None
    failed = any(s.point is None for s in steps)
    inside = None
    if rho is not None and max_dev is not None:
        inside = (not failed) and max_dev < rho / 2
    return TrackingReport(
        x0=anchor.tolist(),
        kind=kind,
        steps=steps,
        max_deviation=max_dev,
        inside_half_ball=inside,
        failed=failed,
    )
