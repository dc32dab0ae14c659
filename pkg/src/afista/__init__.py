"""Adaptive FISTA: proximal gradient steps with optimized extrapolation."""

from .core import (Block, BlockLayout, LayoutError, SmoothFunction,
                   SolverConfig, TraceRecord, make_rng, pack, param_vector,
                   unpack)
from .epg import (EPGResult, backtrack_beta, backtrack_lipschitz, beta_star,
                  epg_step_alternating, epg_step_closed_form, extrapolate,
                  model_value)
from .metric import (DiagonalMetric, HessianOnSpan, LowRankMetric,
                     MetricConstructionError, MetricError, build_q_rank_r,
                     sr1_memory_metric)
from .problems import (CompositeProblem, LeastSquaresProblem, NetworkSpec,
                       QuadraticProblem, generate_data, make_network_problem,
                       make_random_lasso, sparsity_level)
from .prox import NonsmoothSpec, g_value, prox_diag, prox_metric, prox_rank1
from .solvers import SOLVERS, SolverRun, get_solver, theta_sequence

__version__ = "0.1.0"

__all__ = [
    "Block", "BlockLayout", "LayoutError", "SmoothFunction", "SolverConfig",
    "TraceRecord", "make_rng", "pack", "param_vector", "unpack",
    "EPGResult", "backtrack_beta", "backtrack_lipschitz", "beta_star",
    "epg_step_alternating", "epg_step_closed_form", "extrapolate",
    "model_value",
    "DiagonalMetric", "HessianOnSpan", "LowRankMetric",
    "MetricConstructionError", "MetricError", "build_q_rank_r",
    "sr1_memory_metric",
    "CompositeProblem", "LeastSquaresProblem", "NetworkSpec",
    "QuadraticProblem", "generate_data", "make_network_problem",
    "make_random_lasso", "sparsity_level",
    "NonsmoothSpec", "g_value", "prox_diag", "prox_metric", "prox_rank1",
    "SOLVERS", "SolverRun", "get_solver", "theta_sequence",
]
