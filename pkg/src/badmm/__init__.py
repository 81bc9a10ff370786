"""Bregman ADMM solvers for sparse recovery, with descent diagnostics.

The package splits a composite objective ``||Dx - b||^2 + penalty(y)`` under
the constraint ``Ax = By`` and solves it by alternating shrinkage / quadratic
steps with a dual ascent update, recording per-iteration descent margins and
stationarity residuals along the way. ``badmm.cli`` exposes the benchmark
runner; the submodules are usable as a library.
"""

from .bregman import (
    BregmanGenerator,
    Domain,
    bregman_distance,
    itakura_saito_generator,
    kullback_leibler_generator,
    linearizing_generator,
    mahalanobis_generator,
    squared_norm_generator,
    zero_generator,
)
from .errors import (
    BadmmError,
    ConvexityViolation,
    DimensionMismatch,
    DomainViolation,
    InvalidBracket,
    InvalidParameter,
    IoError,
    NoConvergence,
    NotSpd,
    StrategyMismatch,
    SubproblemFailure,
    UsageError,
)
from .lagrangian import (
    AnalysisConstants,
    Assumption,
    DescentMargins,
    StationarityResidual,
    alpha_lower_bound,
    analysis_constants,
    aug_lagrangian,
    aux_function,
    derive_constants,
    descent_check,
    kappa_constants,
    sigma_constants,
    stationarity_residual,
)
from .numerics import SpdFactorization, min_eig_symmetric, spd_factor, spectral_norm
from .problems import (
    CompositeProblem,
    GroundTruth,
    QuadraticLoss,
    RegKind,
    Regularizer,
    difference_matrix,
    gaussian_matrix,
    make_tv_problem,
    piecewise_constant_signal,
    regularizer_prox,
    regularizer_subdiff_dist,
    regularizer_value,
)
from .proximal import (
    ShrinkageKind,
    half_shrink_scalar,
    half_shrink_threshold,
    prox_oracle_scalar,
    shrink_vector,
    soft_shrink_scalar,
)
from .solver import (
    IterationRecord,
    SolveResult,
    SolverConfig,
    SolverState,
    Strategy,
    badmm_iterate,
    closed_form_x_step,
    closed_form_y_step,
    initial_state,
    proxlinear_y_step,
    solve,
    x_update_matrix,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
