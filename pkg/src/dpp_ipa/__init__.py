"""Independent-particle approximation to elementary determinantal point processes.

Build a rank-k projection kernel from orbitals on a 2D grid, localize the
orbitals by selected columns of the density matrix, partition the grid into k
mass-balanced regions, and draw k-point realizations at O(k log N) cost; an
exact small-scale oracle quantifies the approximation.
"""

from .errors import (
    DegenerateRegionError,
    DppIpaError,
    FileFormatError,
    IllConditionedError,
    InvalidArgumentError,
    NumericalFailureError,
    RankDeficientError,
    ShellViolationError,
    TooLargeError,
    UndefinedSpreadError,
)
from .model_problems import (
    BC_DIRICHLET,
    BC_PERIODIC,
    Grid,
    OrbitalSet,
    PotentialSpec,
    assemble_operator,
    build_grid,
    density,
    fourier_orbitals,
    lowest_eigenmodes,
    random_orthonormal_orbitals,
    shell_closures,
)
from .oracle import (
    CompareParams,
    ComparisonReport,
    ExactPmf,
    brute_force_pmf,
    compare,
    exact_sample,
    pair_inclusion_exact,
    pair_inclusion_independent,
)
from .partition import (
    BalanceParams,
    IndependentModel,
    Partition,
    assign_labels,
    balance,
    build_model,
    region_masses,
)
from .sampler import (
    SampleSet,
    ThroughputReport,
    sample_batch,
    sample_many,
    sample_one,
    throughput_probe,
)
from .scdm import ScdmResult, column_spread, inv_sqrt_spd, pivoted_qr_pivots, scdm_localize

__version__ = "0.1.0"

__all__ = [
    "BC_DIRICHLET",
    "BC_PERIODIC",
    "BalanceParams",
    "CompareParams",
    "ComparisonReport",
    "DegenerateRegionError",
    "DppIpaError",
    "ExactPmf",
    "FileFormatError",
    "Grid",
    "IllConditionedError",
    "IndependentModel",
    "InvalidArgumentError",
    "NumericalFailureError",
    "OrbitalSet",
    "Partition",
    "PotentialSpec",
    "RankDeficientError",
    "SampleSet",
    "ScdmResult",
    "ShellViolationError",
    "ThroughputReport",
    "TooLargeError",
    "UndefinedSpreadError",
    "assemble_operator",
    "assign_labels",
    "balance",
    "brute_force_pmf",
    "build_grid",
    "build_model",
    "column_spread",
    "compare",
    "density",
    "exact_sample",
    "fourier_orbitals",
    "inv_sqrt_spd",
    "lowest_eigenmodes",
    "pair_inclusion_exact",
    "pair_inclusion_independent",
    "pivoted_qr_pivots",
    "random_orthonormal_orbitals",
    "region_masses",
    "sample_batch",
    "sample_many",
    "sample_one",
    "scdm_localize",
    "shell_closures",
    "throughput_probe",
]
