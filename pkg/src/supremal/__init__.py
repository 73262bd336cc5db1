import warnings

from supremal import gallery
from supremal.functional import e_infty, local_functional, supremal_value
from supremal.grid import GridDomain, GridField, SubdomainMask, ball_mask
from supremal.hamiltonian import HamiltonianSpec, builtin, parse
from supremal.verify import falsify, minimality_check, rank_one_am_suite

warnings.filterwarnings(
    "ignore",
    message="Pydantic serializer warnings:",
    category=UserWarning,
    module="pydantic.main",
)
__version__ = "0.1.0"
__all__ = [
    "GridDomain",
    "GridField",
    "HamiltonianSpec",
    "SubdomainMask",
    "ball_mask",
    "builtin",
    "e_infty",
    "falsify",
    "gallery",
    "local_functional",
    "minimality_check",
    "parse",
    "rank_one_am_suite",
    "supremal_value",
]
