"""Randomized search for rank-one competitors that beat u on a subdomain.

Two competitor families are tried. Level-set truncations replace the
xi-component of u by a constant on a sublevel component compactly inside the
mask; for the cone this is the constant extension that lowers E_inf from 1 to
0. Random bump variations u + xi phi live on random sub-balls. Energies are
compared on the one-cell erosion of the competitor's subdomain, so no
difference stencil reaches across the seam where the competitor rejoins u.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import ndimage

from supremal.calculus import BumpSpec, VariationSpec
from supremal.functional import e_infty
from supremal.grid import GridField, SubdomainMask, ball_mask, gradient_at
from supremal.hamiltonian import HamiltonianSpec
from supremal.tensor import frobenius_norm, unit_vector
from supremal.utilities.constants import (
    BOUNDARY_TOL,
    DEFAULT_BUDGET,
    DEFAULT_MAX_BUMPS,
    DEFAULT_SEED,
    TRUNCATION_LEVELS,
)
from supremal.utilities.errors import ContainmentError, ParameterError
from supremal.utilities.events import WitnessFoundEvent, emit
from supremal.verify.minimality import default_tolerance
from supremal.verify.sampling import random_bumps, random_direction, random_sub_ball

logger = logging.getLogger(__name__)

CompetitorKind = Literal["level-set-truncation", "bump"]

WITNESS_RECHECK_TOL = 1e-12


class FalsifyWitness(BaseModel):
    """A competitor v with v = u off a subdomain and E_inf(v) < E_inf(u) on it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    competitor: CompetitorKind
    xi: List[float]
    sign: Literal[1, -1] = Field(default=1, description="Orientation of a truncation")
    level: Optional[float] = Field(default=None, description="Truncation level t")
    anchor_index: Optional[Tuple[int, ...]] = Field(
        default=None, description="A grid point of the truncated component"
    )
    bumps: List[BumpSpec] = Field(default_factory=list)
    sub_center: Optional[List[float]] = None
    sub_radius: Optional[float] = None
    subdomain: str = Field(description="Label of the competitor's subdomain")
    points: int = Field(description="Grid points the energies were compared on")
    e_infty_u: float
    e_infty_v: float
    gap: float = Field(description="e_infty_u - e_infty_v")
    boundary_defect: float = Field(description="max |v - u| next to the subdomain")
    trial: Optional[int] = Field(
        default=None, description="Random trial index, None for a truncation"
    )

    @model_validator(mode="after")
    def check_boundary(self) -> "FalsifyWitness":
        if self.boundary_defect > BOUNDARY_TOL:
            raise ValueError(
                f"Competitor differs from u by {self.boundary_defect} on the subdomain boundary"
            )
        return self

    def variation(self) -> VariationSpec:
        """The bump competitor as ``u + xi phi``; truncations are not rank-one variations."""
        if self.competitor != "bump":
            raise ParameterError("Only bump witnesses are rank-one variations")
        return VariationSpec(xi=self.xi, bumps=self.bumps)


class FalsifyReport(BaseModel):
    witness: Optional[FalsifyWitness] = None
    budget: int
    structured_candidates: int = Field(description="Truncation components compared")
    random_candidates: int = Field(description="Bump trials compared")
    best_gap: Optional[float] = Field(description="Largest gap seen, witness or not")
    tol: float
    lipschitz: float
    seed: int

    @property
    def found(self) -> bool:
        return self.witness is not None


class WitnessCheck(BaseModel):
    recorded: float
    recomputed: float
    boundary_defect: float

    @property
    def confirmed(self) -> bool:
        return (
            abs(self.recorded - self.recomputed) <= WITNESS_RECHECK_TOL
            and self.boundary_defect <= BOUNDARY_TOL
        )


def _structure(ndim: int) -> np.ndarray:
    return ndimage.generate_binary_structure(ndim, ndim)


def _compact_components(
    below: np.ndarray, mask: SubdomainMask
) -> Iterator[Tuple[int, np.ndarray]]:
    """Components of ``below`` whose one-cell dilation stays inside ``mask``."""
    structure = _structure(below.ndim)
    labels, count = ndimage.label(below & mask.flags, structure=structure)
    for k in range(1, count + 1):
        component = labels == k
        grown = ndimage.binary_dilation(component, structure=structure)
        if not np.any(grown & ~mask.flags):
            yield k, component


def _component_at(below: np.ndarray, mask: SubdomainMask, index: Sequence[int]) -> np.ndarray:
    labels, _ = ndimage.label(below & mask.flags, structure=_structure(below.ndim))
    k = labels[tuple(index)]
    if k == 0:
        raise ParameterError(f"Anchor {tuple(index)} is not below the truncation level")
    return labels == k


def truncation(
    u: GridField, xi: Sequence[float], sign: int, level: float, component: np.ndarray
) -> GridField:
    """v = u + s xi (t - s xi.u)^+ on ``component``, u elsewhere."""
    direction, _ = unit_vector(xi)
    w = sign * (u.values @ direction)
    lift = np.where(component, np.maximum(level - w, 0.0), 0.0)
    return u.with_values(
        u.values + sign * direction * lift[..., np.newaxis], name=f"{u.name}-truncated"
    )


def _gap(
    H: HamiltonianSpec,
    u: GridField,
    v: GridField,
    region: np.ndarray,
    label: str,
    use_analytic: bool,
) -> Optional[Tuple[float, float, int, float]]:
    """``(E_inf(u), E_inf(v), points, boundary defect)`` on the eroded region."""
    inner = SubdomainMask(flags=region, label=label).erode(1)
    if inner.is_empty():
        return None
    layer = ndimage.binary_dilation(region, structure=_structure(region.ndim)) & ~region
    defect = float(np.abs(v.values[layer] - u.values[layer]).max()) if layer.any() else 0.0
    return (
        e_infty(H, u, inner, use_analytic),
        e_infty(H, v, inner, use_analytic),
        inner.count,
        defect,
    )


def _directions(N: int, rng: np.random.Generator, extra: int = 2) -> List[np.ndarray]:
    if N == 1:
        return [np.ones(1)]
    return list(np.eye(N)) + [random_direction(rng, N) for _ in range(extra)]


def _truncation_candidates(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    rng: np.random.Generator,
    levels: int,
    use_analytic: bool,
) -> Tuple[List[FalsifyWitness], int]:
    found: List[FalsifyWitness] = []
    tried = 0
    fractions = np.linspace(0.0, 1.0, levels + 2)[1:-1]
    for direction in _directions(u.N, rng):
        for sign in (1, -1):
            w = sign * (u.values @ direction)
            for level in np.unique(np.quantile(w[mask.flags], fractions)):
                below = w < level
                for k, component in _compact_components(below, mask):
                    anchor = tuple(int(i) for i in np.argwhere(component)[0])
                    v = truncation(u, direction, sign, float(level), component)
                    label = f"sublevel({sign:+d};{level:.6g};{k})"
                    result = _gap(H, u, v, component, label, use_analytic)
                    if result is None:
                        continue
                    tried += 1
                    eu, ev, points, defect = result
                    found.append(
                        FalsifyWitness(
                            competitor="level-set-truncation",
                            xi=direction.tolist(),
                            sign=sign,
                            level=float(level),
                            anchor_index=anchor,
                            subdomain=label,
                            points=points,
                            e_infty_u=eu,
                            e_infty_v=ev,
                            gap=eu - ev,
                            boundary_defect=defect,
                        )
                    )
    return found, tried


def _bump_candidate(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    trial: int,
    seed_seq: np.random.SeedSequence,
    max_bumps: int,
    use_analytic: bool,
) -> Optional[FalsifyWitness]:
    rng = np.random.default_rng(seed_seq)
    domain = u.domain
    try:
        sub, center, radius = random_sub_ball(rng, domain, mask)
    except ContainmentError:
        return None
    xi = random_direction(rng, u.N)
    bumps = random_bumps(rng, domain, sub, max_bumps)
    if not bumps:
        return None
    v = VariationSpec(xi=xi.tolist(), bumps=bumps).apply(u, mask=sub)
    result = _gap(H, u, v, sub.flags, sub.label, use_analytic)
    if result is None:
        return None
    eu, ev, points, defect = result
    return FalsifyWitness(
        competitor="bump",
        xi=xi.tolist(),
        bumps=bumps,
        sub_center=center.tolist(),
        sub_radius=radius,
        subdomain=sub.label,
        points=points,
        e_infty_u=eu,
        e_infty_v=ev,
        gap=eu - ev,
        boundary_defect=defect,
        trial=trial,
    )


def falsify(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
    tol: Optional[float] = None,
    levels: int = TRUNCATION_LEVELS,
    max_bumps: int = DEFAULT_MAX_BUMPS,
    use_analytic: bool = False,
    workers: Optional[int] = None,
) -> FalsifyReport:
    """Search for a competitor whose energy gap exceeds ``tol``.

    ``tol`` defaults to KAPPA h (1 + Lip(u)). The best witness over both
    families is returned; ties keep the earliest candidate, so the report
    depends only on ``seed`` and the inputs.
    """
    if budget < 1:
        raise ParameterError(f"Falsifier budget must be >= 1, got {budget}")
    grads = gradient_at(u, mask.indices(), use_analytic=use_analytic)
    lipschitz = float(frobenius_norm(grads).max())
    tolerance = default_tolerance(u.domain.h, lipschitz) if tol is None else float(tol)

    structured_seq, random_seq = np.random.SeedSequence(seed).spawn(2)
    candidates, structured = _truncation_candidates(
        H, u, mask, np.random.default_rng(structured_seq), levels, use_analytic
    )

    children = random_seq.spawn(budget)

    def run_trial(k: int) -> Optional[FalsifyWitness]:
        return _bump_candidate(H, u, mask, k, children[k], max_bumps, use_analytic)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(run_trial, range(budget)))
    else:
        trials = [run_trial(k) for k in range(budget)]
    random_found = [w for w in trials if w is not None]
    candidates.extend(random_found)

    best: Optional[FalsifyWitness] = None
    for candidate in candidates:
        if best is None or candidate.gap > best.gap:
            best = candidate
    best_gap = best.gap if best is not None else None
    witness = best if best is not None and best.gap > tolerance else None

    if witness is not None:
        logger.info(
            f"Falsifier found a {witness.competitor} competitor on '{witness.subdomain}' "
            f"with gap {witness.gap:.6g} > tol {tolerance:.3g}"
        )
        emit(
            falsify,
            WitnessFoundEvent(check="falsify", competitor=witness.competitor, gap=witness.gap),
        )
    return FalsifyReport(
        witness=witness,
        budget=budget,
        structured_candidates=structured,
        random_candidates=len(random_found),
        best_gap=best_gap,
        tol=tolerance,
        lipschitz=lipschitz,
        seed=seed,
    )


def verify_witness(
    H: HamiltonianSpec,
    u: GridField,
    mask: SubdomainMask,
    witness: FalsifyWitness,
    use_analytic: bool = False,
) -> WitnessCheck:
    """Rebuild the competitor from the witness record alone and recompute its gap."""
    if witness.competitor == "level-set-truncation":
        if witness.level is None or witness.anchor_index is None:
            raise ParameterError("Truncation witness needs a level and an anchor")
        direction, _ = unit_vector(witness.xi)
        below = witness.sign * (u.values @ direction) < witness.level
        region = _component_at(below, mask, witness.anchor_index)
        v = truncation(u, direction, witness.sign, witness.level, region)
    else:
        if witness.sub_center is None or witness.sub_radius is None:
            raise ParameterError("Bump witness needs its sub-ball")
        sub = ball_mask(
            u.domain, witness.sub_center, witness.sub_radius, parent=mask, depth=mask.depth
        )
        region = sub.flags
        v = witness.variation().apply(u, mask=sub)
    result = _gap(H, u, v, region, witness.subdomain, use_analytic)
    if result is None:
        raise ParameterError(f"Witness subdomain '{witness.subdomain}' erodes to nothing")
    eu, ev, _, defect = result
    return WitnessCheck(recorded=witness.gap, recomputed=eu - ev, boundary_defect=defect)
