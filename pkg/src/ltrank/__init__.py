"""LT-code decoding-error analysis over GF(2).

Builds row-degree distributions with dense-row supplementation,
computes exact and upper-bound decoding-error-probability curves from
the conditional rank-gain distribution of random binary matrices,
validates them against Gaussian-elimination Monte Carlo, and optimizes
the dense fraction against a target error bound.
"""

from . import backend
from .degree import (
    DegreeDistribution,
    DensityConstraintViolated,
    SupplementedDistribution,
    average_row_degree,
    column_null_stats,
    example_distribution,
    load_distribution,
    rsd_expected_counts,
    rsd_normalize,
    sample_matrix,
    save_distribution,
    supplement,
    truncate,
)
from .dep import (
    DeficiencySpectrum,
    DepCurve,
    SpectrumCoverageError,
    binomial_pmf,
    edep,
    estimate_spectrum,
    load_spectrum,
    mso,
    save_spectrum,
    simulate_dep,
    ubdep,
    wilson_interval,
)
from .gf2 import (
    BitMatrix,
    SolveOutcome,
    TriangulationResult,
    matrix_from_rows,
    matvec,
    rank,
    residual_fraction,
    smlda_solve,
    triangulate,
)
from .kovalenko import (
    chain_sums,
    dense_rank_pmf,
    kfrl,
    kfro,
    rank_gain_pmf,
    rank_gain_prob,
    rank_gain_prob_recursive,
)
from .optimize import (
    NoCandidateSufficient,
    OptimizationResult,
    OptimizationSpec,
    optimize_dense_fraction,
)

__version__ = "0.1.0"
