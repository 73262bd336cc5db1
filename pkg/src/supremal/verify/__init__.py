from .falsify import (
    FalsifyReport,
    FalsifyWitness,
    WitnessCheck,
    falsify,
    truncation,
    verify_witness,
)
from .gate import HypothesisReport, gradient_jumps, hypothesis_gate
from .jensen import (
    JensenResult,
    JensenTrials,
    annulus_control,
    jensen_check,
    jensen_trials,
    section_of,
)
from .minimality import (
    BallComparison,
    VerifyReport,
    compare_balls,
    default_tolerance,
    minimality_check,
)
from .sampling import random_bumps, random_direction, random_sub_ball, random_sub_mask
from .suite import SuiteConfig, SuiteReport, TrialOutcome, rank_one_am_suite

__all__ = [
    "BallComparison",
    "FalsifyReport",
    "FalsifyWitness",
    "HypothesisReport",
    "JensenResult",
    "JensenTrials",
    "SuiteConfig",
    "SuiteReport",
    "TrialOutcome",
    "VerifyReport",
    "WitnessCheck",
    "annulus_control",
    "compare_balls",
    "default_tolerance",
    "falsify",
    "gradient_jumps",
    "hypothesis_gate",
    "jensen_check",
    "jensen_trials",
    "minimality_check",
    "random_bumps",
    "random_direction",
    "random_sub_ball",
    "random_sub_mask",
    "rank_one_am_suite",
    "section_of",
    "truncation",
    "verify_witness",
]
