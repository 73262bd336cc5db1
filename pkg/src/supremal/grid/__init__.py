from .domain import GridDomain, Index, SubdomainMask, ball_mask
from .extrema import Extremum, interior_extrema
from .field import (
    GridField,
    ess_sup,
    gradient,
    gradient_at,
    gradient_field,
    hessian,
    hessian_at,
    hessian_field,
    masked_values,
)
from .field_io import field_from_csv, field_to_csv, read_field_csv, write_field_csv

__all__ = [
    "Extremum",
    "GridDomain",
    "GridField",
    "Index",
    "SubdomainMask",
    "ball_mask",
    "ess_sup",
    "field_from_csv",
    "field_to_csv",
    "gradient",
    "gradient_at",
    "gradient_field",
    "hessian",
    "hessian_at",
    "hessian_field",
    "interior_extrema",
    "masked_values",
    "read_field_csv",
    "write_field_csv",
]
