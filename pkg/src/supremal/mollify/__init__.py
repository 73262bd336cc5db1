from .kernel import MollifierKernel
from .shells import (
    PartitionOfUnity,
    ShellDecomposition,
    build_partition,
    build_shells,
    inradius,
    mask_distance,
)
from .smoothing import (
    ConvergenceRow,
    ConvergenceTable,
    ModulusTable,
    SmoothingResult,
    TrackingReport,
    TrackStep,
    convergence_check,
    modulus,
    smooth,
    track_extremum,
)

__all__ = [
    "ConvergenceRow",
    "ConvergenceTable",
    "ModulusTable",
    "MollifierKernel",
    "PartitionOfUnity",
    "ShellDecomposition",
    "SmoothingResult",
    "TrackStep",
    "TrackingReport",
    "build_partition",
    "build_shells",
    "convergence_check",
    "inradius",
    "mask_distance",
    "modulus",
    "smooth",
    "track_extremum",
]
