"""Exact l2-penalty solver for equality-constrained nonlinear programs.

Penalized subproblems ``min f(x) + tau * ||c(x)||`` are solved by an adaptive
proximal-gradient method (R2) or a proximal quasi-Newton method (R2N); every
proximal step is evaluated in closed form through a secular equation.
"""

from .linalg import StackedQR, solve_least_norm, solve_normal, stacked_qr
from .krylov import minres
from .quasi_newton import QuasiNewtonOp, qn_update
from .problem import EvalCounters, Evaluator, Problem, verify_derivatives
from .registry import load_qp_json, registry_get, registry_names
from .prox import (
    Branch,
    IndefiniteCurvatureError,
    KrylovError,
    ProxNonConvergence,
    ProxQuery,
    ProxResult,
    prox_l2_linear,
    prox_l2_quadratic,
)
from .models import ModelPoint, model_value, penalty_objective, theta, xi
from .subsolvers import InnerConfig, InnerResult, InnerStatus, r2_solve, r2n_solve
from .penalty import OuterConfig, SolveReport, SolveStatus, kkt_residual, solve

__all__ = [
    "Branch",
    "EvalCounters",
    "Evaluator",
    "IndefiniteCurvatureError",
    "InnerConfig",
    "InnerResult",
    "InnerStatus",
    "KrylovError",
    "ModelPoint",
    "OuterConfig",
    "Problem",
    "ProxNonConvergence",
    "ProxQuery",
    "ProxResult",
    "QuasiNewtonOp",
    "SolveReport",
    "SolveStatus",
    "StackedQR",
    "kkt_residual",
    "load_qp_json",
    "minres",
    "model_value",
    "penalty_objective",
    "prox_l2_linear",
    "prox_l2_quadratic",
    "qn_update",
    "r2_solve",
    "r2n_solve",
    "registry_get",
    "registry_names",
    "solve",
    "solve_least_norm",
    "solve_normal",
    "stacked_qr",
    "theta",
    "verify_derivatives",
    "xi",
]

__version__ = "0.1.0"
