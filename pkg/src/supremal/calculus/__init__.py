from .bump import (
    BumpProfile,
    BumpSpec,
    VariationSpec,
    make_bump,
    make_bumps,
    rank_one_variation,
    zero_field,
)
from .residuals import (
    ResidualKind,
    ResidualMap,
    ResidualReport,
    derivatives_at_indices,
    derivatives_at_points,
    hj_residual,
    infty_laplacian_scalar,
    infty_laplacian_system,
    laplacian,
    laplacian_part,
    normal_part,
    normal_residual,
    observed_order,
    perp_projections,
    residual_at_points,
    residual_sweep,
    scalar_part,
    system_part,
    tangential_part,
    tangential_residual,
)

__all__ = [
    "BumpProfile",
    "BumpSpec",
    "ResidualKind",
    "ResidualMap",
    "ResidualReport",
    "VariationSpec",
    "derivatives_at_indices",
    "derivatives_at_points",
    "hj_residual",
    "infty_laplacian_scalar",
    "infty_laplacian_system",
    "laplacian",
    "laplacian_part",
    "make_bump",
    "make_bumps",
    "normal_part",
    "normal_residual",
    "observed_order",
    "perp_projections",
    "rank_one_variation",
    "residual_at_points",
    "residual_sweep",
    "scalar_part",
    "system_part",
    "tangential_part",
    "tangential_residual",
    "zero_field",
]
