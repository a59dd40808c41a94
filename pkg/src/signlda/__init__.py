"""Spatial-sign based sparse linear discriminant analysis.

Robust two-class classification for high-dimensional, heavy-tailed data:
spatial-median centers and a spatial-sign scatter estimate feed a
Dantzig-selector style constrained l1 program for the discriminant
direction. Moment-based and lasso least-squares flavors are included as
baselines, along with an elliptical-distribution simulation lab and a CLI.
"""

from .classifier import (
    FLAVORS,
    CVResult,
    DiscriminantModel,
    FoldAssignment,
    MetricsReport,
    cross_validate_lambda,
    decision_values,
    evaluate,
    fit_cv,
    fit_discriminant,
    flavor_centers,
    load_model,
    make_folds,
    predict,
    save_model,
    support_size,
)
from .errors import DegenerateClassesError, SingularBasisError, SolverFailureError
from .estimator import SparseLDA
from .robust import (
    LocationEstimate,
    default_ridge,
    pooled_sample_covariance,
    pooled_sign_covariance,
    ridge_stabilize,
    sample_mean,
    sign_covariance,
    spatial_median,
    spatial_sign,
)
from .simlab import (
    COV_KINDS,
    LAW_KINDS,
    CovModel,
    EllipticalLaw,
    ExperimentResult,
    ExperimentSpec,
    MethodSummary,
    ReplicationResult,
    build_sigma,
    conditional_error_Rn,
    fisher_oracle_error,
    load_spec,
    run_experiment,
    sample_elliptical,
    sparsity_sweep,
    spec_from_mapping,
)
from .solvers import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_SUBOPTIMAL,
    DirectionSolution,
    L1Program,
    LassoSolution,
    default_lambda_grid,
    lasso_direction,
    solve_constrained_l1,
)

__version__ = "0.1.0"

__all__ = [
    "COV_KINDS",
    "CVResult",
    "CovModel",
    "DegenerateClassesError",
    "DirectionSolution",
    "DiscriminantModel",
    "EllipticalLaw",
    "ExperimentResult",
    "ExperimentSpec",
    "FLAVORS",
    "FoldAssignment",
    "L1Program",
    "LAW_KINDS",
    "LassoSolution",
    "LocationEstimate",
    "MethodSummary",
    "MetricsReport",
    "ReplicationResult",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_SUBOPTIMAL",
    "SingularBasisError",
    "SolverFailureError",
    "SparseLDA",
    "build_sigma",
    "conditional_error_Rn",
    "cross_validate_lambda",
    "decision_values",
    "default_lambda_grid",
    "default_ridge",
    "evaluate",
    "fisher_oracle_error",
    "fit_cv",
    "fit_discriminant",
    "flavor_centers",
    "lasso_direction",
    "load_model",
    "load_spec",
    "make_folds",
    "pooled_sample_covariance",
    "pooled_sign_covariance",
    "predict",
    "ridge_stabilize",
    "run_experiment",
    "sample_elliptical",
    "sample_mean",
    "save_model",
    "sign_covariance",
    "solve_constrained_l1",
    "sparsity_sweep",
    "spatial_median",
    "spatial_sign",
    "spec_from_mapping",
    "support_size",
    "__version__",
]
