"""λ₁ 选择：指标、网格扫描与自动选择流水线"""

from .lambda_select import (
    CurveRow,
    LambdaGrid,
    RuleMode,
    SelectionCurve,
    SelectionReport,
    SelectionRule,
    curve_plot_frame,
    find_peak,
    make_grid,
    select_lambda,
    split_holdout,
    sweep,
)
from .metrics import err_degree_metric, err_metric, information_criteria, mse_out
from .pipeline import SelectionOutcome, default_grid, refit, select_and_fit

__all__ = [
    "CurveRow",
    "LambdaGrid",
    "RuleMode",
    "SelectionCurve",
    "SelectionOutcome",
    "SelectionReport",
    "SelectionRule",
    "curve_plot_frame",
    "default_grid",
    "err_degree_metric",
    "err_metric",
    "find_peak",
    "information_criteria",
    "make_grid",
    "mse_out",
    "refit",
    "select_and_fit",
    "select_lambda",
    "split_holdout",
    "sweep",
]
