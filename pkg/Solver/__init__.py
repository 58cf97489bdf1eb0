"""块坐标下降求解器：Gram 缓存、R 阶段 CCD 与多项式系数拟合"""

from .ccd_solver import (
    FitResult,
    RStageResult,
    SolverDiagnostics,
    StopReason,
    compute_R,
    fit_cgp,
    in_sample_mse,
    lambda_max,
    residual_matrix,
    soft_threshold,
    update_R1_column,
    update_Ri,
)
from .gram_cache import GramCache, build_gram_cache, regularized_inverse
from .options import SolverOptions, build_solver_options
from .poly_fit import c_stage_objective, fit_C

__all__ = [
    "FitResult",
    "GramCache",
    "RStageResult",
    "SolverDiagnostics",
    "SolverOptions",
    "StopReason",
    "build_gram_cache",
    "build_solver_options",
    "c_stage_objective",
    "compute_R",
    "fit_C",
    "fit_cgp",
    "in_sample_mse",
    "lambda_max",
    "regularized_inverse",
    "residual_matrix",
    "soft_threshold",
    "update_R1_column",
    "update_Ri",
]
