"""Sparse regression with slowly varying coefficients over a similarity graph."""

__version__ = "0.1.0"

from .graph import SimilarityGraph
from .problem import (
    BudgetError,
    ProblemInstance,
    QuadForm,
    SparsityBudget,
    build_quadform,
    check_feasible,
    support_change_count,
    support_of,
    true_objective,
)
from .oracle import (
    OracleCache,
    OracleEvaluation,
    beta_star,
    eval_cost,
    eval_cost_fractional,
    eval_gradient,
    evaluate,
    relaxation_family_value,
    verify_penrose,
)
from .master import (
    Cut,
    SolveLimits,
    SolveResult,
    initial_cuts,
    solve_support_selection,
)
from .stepwise import StepwiseResult, sparse_ridge_greedy, stepwise_fit
from .benchmark import (
    GridSearchResult,
    MetricsReport,
    SynthDataset,
    SynthParams,
    add_noise,
    compute_metrics,
    default_grid,
    fit_static,
    gen_beta_spatial,
    gen_beta_temporal,
    gen_graph_uniform,
    gen_x,
    grid_search,
    lambda_beta_grid,
    lambda_delta_grid,
    make_synthetic_dataset,
    run_benchmark,
    solver_budget,
)

__all__ = [
    "__version__",
    "SimilarityGraph",
    "BudgetError",
    "ProblemInstance",
    "QuadForm",
    "SparsityBudget",
    "build_quadform",
    "check_feasible",
    "support_change_count",
    "support_of",
    "true_objective",
    "OracleCache",
    "OracleEvaluation",
    "beta_star",
    "eval_cost",
    "eval_cost_fractional",
    "eval_gradient",
    "evaluate",
    "relaxation_family_value",
    "verify_penrose",
    "Cut",
    "SolveLimits",
    "SolveResult",
    "initial_cuts",
    "solve_support_selection",
    "StepwiseResult",
    "sparse_ridge_greedy",
    "stepwise_fit",
    "GridSearchResult",
    "MetricsReport",
    "SynthDataset",
    "SynthParams",
    "add_noise",
    "compute_metrics",
    "default_grid",
    "fit_static",
    "gen_beta_spatial",
    "gen_beta_temporal",
    "gen_graph_uniform",
    "gen_x",
    "grid_search",
    "lambda_beta_grid",
    "lambda_delta_grid",
    "make_synthetic_dataset",
    "run_benchmark",
    "solver_budget",
]
