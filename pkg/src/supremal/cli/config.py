import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import json5
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from supremal import gallery
from supremal.cli.constants import DEFAULT_OUT_DIR
from supremal.grid import GridDomain, GridField, SubdomainMask, ball_mask, read_field_csv
from supremal.hamiltonian import HamiltonianSpec, builtin, parse
from supremal.utilities.config import apply_overrides
from supremal.utilities.constants import (
    DEFAULT_BUDGET,
    DEFAULT_MAX_BUMPS,
    DEFAULT_SEED,
    DEFAULT_SEGMENTS,
    DEFAULT_TRIALS,
    TRUNCATION_LEVELS,
)
from supremal.utilities.errors import ConfigError

logger = logging.getLogger(__name__)

CheckName = Literal["minimality", "falsify", "convexity", "residual", "mollify-demo", "jensen"]


class HamiltonianConfig(BaseModel):
    builtin: Optional[Literal["euclidean-norm", "weighted-eikonal", "annulus"]] = Field(
        default=None, description="Built-in Hamiltonian; unset means `expression` is H itself"
    )
    expression: Optional[str] = Field(
        default=None, description="H(x,P), or the weight a(x) for weighted-eikonal"
    )
    N: int = Field(default=1, ge=1)
    n: int = Field(default=2, ge=1)
    weights: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_declaration(self) -> "HamiltonianConfig":
        if self.builtin is None and self.expression is None:
            raise ValueError("Declare a Hamiltonian with `builtin` or `expression`")
        if self.builtin in ("euclidean-norm", "annulus") and self.expression is not None:
            raise ValueError(f"`{self.builtin}` takes no expression")
        return self

    def build(self) -> HamiltonianSpec:
        if self.builtin is None:
            return parse(self.expression, dims=(self.N, self.n))
        return builtin(
            self.builtin, self.N, self.n, expression=self.expression, weights=self.weights
        )


class FieldConfig(BaseModel):
    gallery: Optional[str] = Field(default=None, description="Gallery entry name")
    params: Dict[str, Any] = Field(default_factory=dict, description="Gallery parameters")
    csv: Optional[Path] = Field(default=None, description="Grid field CSV file")
    piecewise_affine: Optional[int] = Field(
        default=None, ge=1, description="Seeded convex piecewise-affine field with this many pieces"
    )

    @model_validator(mode="after")
    def check_source(self) -> "FieldConfig":
        given = [s for s in (self.gallery, self.csv, self.piecewise_affine) if s is not None]
        if len(given) != 1:
            raise ValueError("Give exactly one of `gallery`, `csv` or `piecewise_affine`")
        return self


class GridConfig(BaseModel):
    lower: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    upper: List[float] = Field(default_factory=lambda: [1.0, 1.0])
    h: float = Field(default=0.02, gt=0)


class MaskConfig(BaseModel):
    kind: Literal["interior", "box", "ball"] = "interior"
    lower: Optional[List[float]] = None
    upper: Optional[List[float]] = None
    center: Optional[List[float]] = None
    radius: Optional[float] = Field(default=None, gt=0)
    depth: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_shape(self) -> "MaskConfig":
        if self.kind == "box" and (self.lower is None or self.upper is None):
            raise ValueError("A box mask needs `lower` and `upper`")
        if self.kind == "ball" and (self.center is None or self.radius is None):
            raise ValueError("A ball mask needs `center` and `radius`")
        return self

    def build(self, domain: GridDomain) -> SubdomainMask:
        if self.kind == "box":
            return SubdomainMask.box(domain, self.lower, self.upper, depth=self.depth)
        if self.kind == "ball":
            return ball_mask(domain, self.center, self.radius, depth=self.depth)
        return SubdomainMask.interior_of(domain, depth=self.depth)


class MinimalityOptions(BaseModel):
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    max_bumps: int = Field(default=DEFAULT_MAX_BUMPS, ge=1)
    local_trials: int = Field(default=3, ge=0)


class FalsifyOptions(BaseModel):
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)
    levels: int = Field(default=TRUNCATION_LEVELS, ge=1)
    expect_witness: bool = Field(
        default=True, description="Pass when a witness is found (False: pass when none is)"
    )


class ConvexityOptions(BaseModel):
    segments: int = Field(default=DEFAULT_SEGMENTS, ge=1)
    sections: int = Field(default=4, ge=0, description="Random sections also checked")
    section_samples: int = Field(default=2500, ge=1)
    scale: float = Field(default=1.0, gt=0)


class ResidualOptions(BaseModel):
    kind: Literal["hj", "scalar", "system", "tangential", "normal"] = "system"
    hs: List[float] = Field(default_factory=list, description="Extra spacings for the order fit")
    max_residual: Optional[float] = Field(
        default=None, ge=0, description="Pass bound on the sup residual at the finest h"
    )
    min_order: Optional[float] = Field(default=None, description="Pass bound on the fitted order")
    heat_map: bool = Field(default=False, description="Emit the per-point residual map")


class MollifyOptions(BaseModel):
    epsilons: Optional[List[float]] = Field(
        default=None, description="Decreasing radii, d0/2, d0/4, d0/8 when unset"
    )
    d0: Optional[float] = Field(default=None, gt=0)
    max_shells: Optional[int] = Field(default=None, ge=1)


class JensenOptions(BaseModel):
    trials: int = Field(default=1000, ge=1)
    support: int = Field(default=5, ge=1)


class RunConfig(BaseModel):
    """One run: a problem (H, u, grid, mask), the checks to execute and their options."""

    hamiltonian: HamiltonianConfig = Field(
        default_factory=lambda: HamiltonianConfig(builtin="euclidean-norm")
    )
    field: FieldConfig = Field(default_factory=lambda: FieldConfig(gallery="affine"))
    grid: GridConfig = Field(default_factory=GridConfig)
    mask: MaskConfig = Field(default_factory=MaskConfig)
    checks: List[CheckName] = Field(default_factory=lambda: ["minimality"], min_length=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    tol: Optional[float] = Field(default=None, ge=0, description="KAPPA h (1 + Lip) when unset")
    c: Optional[float] = Field(default=None, ge=0, description="Claimed HJ level")
    xi: Optional[List[float]] = Field(default=None, description="Fixed direction where one is used")
    use_analytic: bool = False
    workers: Optional[int] = Field(default=None, ge=1)
    out: Path = Field(default=Path(DEFAULT_OUT_DIR))
    plot_data: bool = True

    minimality: MinimalityOptions = Field(default_factory=MinimalityOptions)
    falsify: FalsifyOptions = Field(default_factory=FalsifyOptions)
    convexity: ConvexityOptions = Field(default_factory=ConvexityOptions)
    residual: ResidualOptions = Field(default_factory=ResidualOptions)
    mollify: MollifyOptions = Field(default_factory=MollifyOptions)
    jensen: JensenOptions = Field(default_factory=JensenOptions)

    def domain(self, h: Optional[float] = None) -> GridDomain:
        return GridDomain(lower=self.grid.lower, upper=self.grid.upper, h=h or self.grid.h)

    def sample_field(self, domain: GridDomain) -> GridField:
        source = self.field
        if source.gallery is not None:
            return gallery.sample(source.gallery, domain, **source.params)
        if source.piecewise_affine is not None:
            return _piecewise_affine(domain, source.piecewise_affine, self.seed)
        return read_field_csv(source.csv)


class Problem(BaseModel):
    """A resolved run config: everything the checks consume."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    H: HamiltonianSpec
    u: GridField
    mask: SubdomainMask
    xi: List[float]


def _piecewise_affine(domain: GridDomain, pieces: int, seed: int) -> GridField:
    rng = np.random.default_rng(np.random.SeedSequence([seed, pieces]))
    slopes = rng.uniform(-1.0, 1.0, size=(pieces, domain.dim))
    offsets = rng.uniform(-0.3, 0.3, size=pieces)
    return GridField.from_function(
        domain, lambda x: np.max(x @ slopes.T + offsets, axis=-1), name="piecewise-affine"
    )


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Read a JSON/JSON5 run config and apply dotted-key overrides on top."""
    values: Dict[str, Any] = {}
    if path is not None:
        try:
            values = json5.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}", e)
        except ValueError as e:
            raise ConfigError(f"Malformed config {path}: {e}", e)
        if not isinstance(values, dict):
            raise ConfigError(f"Config {path} must hold one object, got {type(values).__name__}")
    values = apply_overrides(values, overrides or {})
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"Invalid config at '{where}': {first['msg']}", e)


def resolve(config: RunConfig, h: Optional[float] = None) -> Problem:
    """Build H, the field and the mask, checking dimensions across entries.

    Expression errors surface unchanged so their line and column reach the user.
    """
    try:
        H = config.hamiltonian.build()
        domain = config.domain(h)
    except ValidationError as e:
        raise ConfigError(f"Invalid problem: {e.errors()[0]['msg']}", e)
    if config.field.csv is not None:
        u = config.sample_field(domain)
        if h is not None and abs(h - u.domain.h) > 1e-12 * h:
            raise ConfigError(f"CSV field '{config.field.csv}' is sampled at h={u.domain.h}")
    else:
        u = config.sample_field(domain)
    if H.dims != (u.N, u.n):
        raise ConfigError(f"Hamiltonian acts on {H.N}x{H.n} matrices, field has Du of {u.N}x{u.n}")
    xi = config.xi if config.xi is not None else [1.0] + [0.0] * (u.N - 1)
    if len(xi) != u.N:
        raise ConfigError(f"xi has {len(xi)} entries, field has N={u.N}")
    mask = config.mask.build(u.domain)
    if mask.is_empty():
        raise ConfigError("Mask selects no grid points")
    logger.debug(f"Resolved {H.describe()} on '{u.name}' with mask '{mask.label}' ({mask.count})")
    return Problem(H=H, u=u, mask=mask, xi=xi)
