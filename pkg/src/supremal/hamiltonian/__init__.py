from .convexity import (
    ConvexityVerdict,
    ConvexityWitness,
    check_level_convexity,
    check_rank_one_level_convexity,
    psi_section,
    rank_one_segment_sample,
    rank_one_segments,
    segment_violation,
)
from .expression import parse_expression, to_text
from .hamiltonian import HamiltonianSpec, builtin, eval_hamiltonian, parse

__all__ = [
    "ConvexityVerdict",
    "ConvexityWitness",
    "HamiltonianSpec",
    "builtin",
    "check_level_convexity",
    "check_rank_one_level_convexity",
    "eval_hamiltonian",
    "parse",
    "parse_expression",
    "psi_section",
    "rank_one_segment_sample",
    "rank_one_segments",
    "segment_violation",
    "to_text",
]
