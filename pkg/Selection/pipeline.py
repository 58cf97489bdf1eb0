"""
完整的选择流水线：扫描 → 选 λ₁ → 在全序列上重新拟合
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from Core.cgp_model import TimeSeries
from Solver.ccd_solver import FitResult, fit_cgp, lambda_max
from Solver.options import SolverOptions
from .lambda_select import (
    LambdaGrid,
    SelectionCurve,
    SelectionReport,
    SelectionRule,
    make_grid,
    select_lambda,
    split_holdout,
    sweep,
)

logger = logging.getLogger("cgp.pipeline")


@dataclass(frozen=True)
class SelectionOutcome:
    grid: LambdaGrid
    curve: SelectionCurve
    report: SelectionReport
    lambda_refit: float
    fit: FitResult


def default_grid(X: TimeSeries, M: int, holdout: float, n_points: int = 30, min_ratio: float = 0.01) -> LambdaGrid:
    """以训练窗口的 λ_max 为锚的对数网格"""
    train, _ = split_holdout(X, M, holdout)
    return make_grid("log", lam_max=lambda_max(train, M), n_points=n_points, min_ratio=min_ratio)


def select_and_fit(X: TimeSeries,
                   M: int,
                   opts: SolverOptions,
                   grid: Optional[LambdaGrid] = None,
                   rule: SelectionRule = SelectionRule(),
                   holdout: float = 0.2,
                   true_edge_count: Optional[int] = None,
                   out_of_sample_err: bool = False,
                   max_workers: Optional[int] = None,
                   progress: bool = False) -> SelectionOutcome:
    """
    扫描训练窗口选出 λ₁，再在完整序列上拟合

    λ₁ 乘的是未归一化的残差和，所以重新拟合时按 (K − M)/(K_train − M) 放大。

    Args:
        X: 完整序列
        M: 滞后阶数
        opts: 求解器参数
        grid: λ₁ 网格，None 时使用默认对数网格
        rule: 选择规则
        holdout: 末尾留出比例
        true_edge_count: oracle 规则所需的真实边数
        out_of_sample_err: 扫描时是否计算留出窗口上的 err 指标
        max_workers: 并发上限
        progress: 是否显示进度条

    Returns:
        SelectionOutcome
    """
    grid = grid if grid is not None else default_grid(X, M, holdout)
    curve = sweep(X, M, grid, opts, holdout=holdout, out_of_sample_err=out_of_sample_err,
                  max_workers=max_workers, progress=progress)
    report = select_lambda(curve, rule, true_edge_count=true_edge_count)
    lambda_refit, fit = refit(X, M, opts, curve, report.lambda1)
    return SelectionOutcome(grid=grid, curve=curve, report=report, lambda_refit=lambda_refit, fit=fit)


def refit(X: TimeSeries, M: int, opts: SolverOptions, curve: SelectionCurve, lambda1: float) -> Tuple[float, FitResult]:
    """把训练窗口上选出的 λ₁ 换算到全序列并拟合，返回 (换算后的 λ₁, FitResult)"""
    scale = (X.n_samples - M) / float(curve.n_train - M)
    lambda_refit = lambda1 * scale
    fit = fit_cgp(X, M, opts.with_lambda(lambda_refit))
    logger.info(f"重新拟合: λ₁*={lambda1:g} → {lambda_refit:g}（缩放 {scale:.4f}），边数={fit.A.edge_count}")
    return lambda_refit, fit
