"""Polynomial-free scattered-data interpolation with Generalized MultiQuadrics.

The package provides the GMQ kernel family phi(r) = (1 + (eps r)^(2k))^beta,
reproducible random point sampling on open domains, dense interpolation
(with and without a polynomial tail), a Monte Carlo harness that checks the
almost-sure nonsingularity of the interpolation matrix under random
sampling, and numerical diagnostics for the complex branch-point machinery
underlying that property.
"""

from .kernels import (
    BranchViolationError,
    ComplexLine,
    KernelParams,
    branch_point,
    center_eval,
    complex_line_norm_sq,
    gmq_complex_line_eval,
    gmq_eval,
    gmq_order,
    validate_theorem_mode,
)
from .sampling import (
    Ball,
    Box,
    BoxShell,
    PointSet,
    ProductMarginals,
    RejectionBudgetError,
    Uniform,
    WeightedRejection,
    derive_seed,
    load_points_csv,
    min_pairwise_distance,
    sample_points,
    save_points_csv,
    unit_box,
)
from .interp import (
    CONDITION_GUARD,
    CoincidentPointsError,
    ErrorStats,
    Factorization,
    InterpMatrix,
    Interpolant,
    NumericallySingularError,
    PolynomialDegeneracyError,
    PolynomialTail,
    assemble,
    error_report,
    eval_interpolant,
    factorize,
    fit,
    fit_augmented,
    load_interpolant_json,
    save_interpolant_json,
    total_degree_exponents,
)
from .unisolvence import (
    BranchEntry,
    BranchReport,
    CaseViolationError,
    QuadraticDecomposition,
    TrialConfig,
    TrialRecord,
    argument_margin,
    branch_analyticity_check,
    bordered_matrix,
    classify_rank,
    det_oracle,
    laplace_det,
    laplace_quadratic_decompose,
    laplace_quadratic_weights,
    one_plus_p,
    pick_direction,
    run_trials,
    summarize,
    with_last_maximal,
    write_summary_json,
    write_trials_csv,
)
from .testfuncs import BUILTIN, franke, gaussian_bump, cosine_product, get_test_function

__version__ = "0.1.0"
