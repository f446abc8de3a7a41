"""Means of symmetric positive definite matrices.

Three layers:

- :mod:`spdmeans.kernel`: symmetric eigendecomposition and the spectral
  functional calculus (powers, log, exp, congruence, Loewner order).
- :mod:`spdmeans.means`: two-variable weighted geometric mean, perspective
  lift, inductive and variant multivariate geometric means, arithmetic,
  harmonic, and Karcher means.
- :mod:`spdmeans.harness`: seeded generators and randomized property
  checks (monotonicity, concavity, congruence invariance, and friends).

``spdmeans.cli`` exposes the same functionality as the ``spdmeans``
command.
"""

from .kernel import (
    DomainError,
    EigenDecomposition,
    EigenSolverError,
    GeneralMatrix,
    NotPositiveDefiniteError,
    ShapeError,
    SpdMatrix,
    SpdMeansError,
    SymMatrix,
    SymmetryError,
    congruence,
    default_spd_tol,
    exp_m,
    inv_sqrt,
    inverse,
    is_spd,
    loewner_leq,
    log_m,
    power,
    spectral_apply,
    sqrt,
    sym_eigen,
)
from .means import (
    ConvergenceError,
    MeanKind,
    RegularMap,
    SolverConfig,
    SpdTuple,
    arithmetic_mean,
    harmonic_mean,
    inductive_auxiliary,
    inductive_mean,
    karcher_mean,
    karcher_residual,
    mean,
    perspective,
    variant_auxiliary,
    variant_mean,
    weighted_geometric_2,
)
from .harness import (
    CHECK_NAMES,
    CheckReport,
    GenSpec,
    gen_spd,
    gen_tuple,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EigenDecomposition",
    "EigenSolverError",
    "GeneralMatrix",
    "NotPositiveDefiniteError",
    "ShapeError",
    "SpdMatrix",
    "SpdMeansError",
    "SymMatrix",
    "SymmetryError",
    "congruence",
    "default_spd_tol",
    "exp_m",
    "inv_sqrt",
    "inverse",
    "is_spd",
    "loewner_leq",
    "log_m",
    "power",
    "spectral_apply",
    "sqrt",
    "sym_eigen",
    "ConvergenceError",
    "MeanKind",
    "RegularMap",
    "SolverConfig",
    "SpdTuple",
    "arithmetic_mean",
    "harmonic_mean",
    "inductive_auxiliary",
    "inductive_mean",
    "karcher_mean",
    "karcher_residual",
    "mean",
    "perspective",
    "variant_auxiliary",
    "variant_mean",
    "weighted_geometric_2",
    "CHECK_NAMES",
    "CheckReport",
    "GenSpec",
    "gen_spd",
    "gen_tuple",
    "run_suite",
    "__version__",
]
