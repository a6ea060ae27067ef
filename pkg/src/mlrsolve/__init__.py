"""Mixed linear regression solvers: exact assignment-space search with
a big-M MIP model and LP export, an alternating-minimization heuristic,
synthetic data generation, and convergence-rate diagnostics."""

from .core import (
    ASSIGNMENT_TOL,
    RECOVERY_TOL,
    Assignment,
    CoefficientSet,
    Dataset,
    GroundTruth,
    LossConfig,
    PermutationMatch,
    RegConstraint,
    SolveResult,
    best_assignment,
    match_permutation,
    objective,
    residual_matrix,
    respects_min_residual,
)
from .diagnostics import RateRow, rate_slope, rate_trace
from .heuristic import AmOptions, alternate_minimize, multistart
from .milp import (
    MilpModel,
    SolveOptions,
    branch_and_bound,
    brute_force,
    build_model,
    derive_big_m,
    export_lp,
    parse_lp,
)
from .regress import FitReport, fit, project_l1, supported
from .synth import (
    CounterexampleSpec,
    GeneratorSpec,
    collapse_support,
    counterexample,
    generate,
    read_csv,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ASSIGNMENT_TOL",
    "RECOVERY_TOL",
    "AmOptions",
    "Assignment",
    "CoefficientSet",
    "CounterexampleSpec",
    "Dataset",
    "FitReport",
    "GeneratorSpec",
    "GroundTruth",
    "LossConfig",
    "MilpModel",
    "PermutationMatch",
    "RateRow",
    "RegConstraint",
    "SolveOptions",
    "SolveResult",
    "alternate_minimize",
    "best_assignment",
    "branch_and_bound",
    "brute_force",
    "build_model",
    "collapse_support",
    "counterexample",
    "derive_big_m",
    "export_lp",
    "fit",
    "generate",
    "match_permutation",
    "multistart",
    "objective",
    "parse_lp",
    "project_l1",
    "rate_slope",
    "rate_trace",
    "read_csv",
    "residual_matrix",
    "respects_min_residual",
    "supported",
    "write_csv",
]
