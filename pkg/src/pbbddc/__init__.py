"""Physics-based BDDC preconditioners for the 3D curl-curl + mass problem.

The package solves the lowest-order Nedelec edge-element discretization of

    curl(alpha curl u) + beta u = f   in a box domain,
    homogeneous tangential Dirichlet conditions on the boundary,

with a preconditioned conjugate gradient solver whose preconditioner is a
balancing domain decomposition by constraints (BDDC) method that adapts its
coarse space to the physical coefficients (PB-BDDC), including the perturbed
and relaxed variants.
"""

from .mesh import BoxMesh
from .fespace import EdgeSpace, CoefficientField
from .linalg import factorize, pcg, SolveReport
from .partition import (
    geometric_partition,
    pb_from_geometric,
    pb_from_material,
    pb_relaxed,
    classify_globs,
    PbPartition,
    Glob,
    GlobSet,
)
from .bddc import BddcPreconditioner, compute_weights
from .config import ProblemConfig
from .driver import RunReport, run

__all__ = [
    "BoxMesh",
    "EdgeSpace",
    "CoefficientField",
    "factorize",
    "pcg",
    "SolveReport",
    "geometric_partition",
    "pb_from_geometric",
    "pb_from_material",
    "pb_relaxed",
    "classify_globs",
    "PbPartition",
    "Glob",
    "GlobSet",
    "BddcPreconditioner",
    "compute_weights",
    "ProblemConfig",
    "RunReport",
    "run",
]
