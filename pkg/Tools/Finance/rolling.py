"""
滚动窗口分析：在每个窗口上自动选 λ₁ 并拟合，跟踪邻接矩阵稀疏度与市场 log(RV)
"""

import logging
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from Core.cgp_model import TimeSeries
from Core.errors import CgpError, ConfigError, InsufficientDataError
from Selection.lambda_select import LambdaGrid, SelectionRule
from Selection.pipeline import select_and_fit
from Solver.options import SolverOptions
from .realized_variance import realized_variance

logger = logging.getLogger("cgp.rolling")

ROLLING_COLUMNS = ["window_start", "window_end", "edge_count", "sparsity_pct", "lambda1", "lambda_refit",
                   "market_log_rv", "error"]


class PriceOptions(BaseModel):
    """价格数据与滚动窗口参数（窗口与步长以样本数计）"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    transform: Literal["none", "log_return"] = "log_return"
    window: int = Field(default=1040, ge=2)
    step: int = Field(default=126, ge=1)
    rv_decay: float = Field(default=0.99, gt=0.0, lt=1.0)
    rv_window: int = Field(default=40, ge=1)


def build_price_options(values: Optional[dict] = None) -> PriceOptions:
    try:
        return PriceOptions(**(values or {}))
    except ValidationError as e:
        raise ConfigError(f"价格参数校验失败: {e}") from e


def rolling_analysis(X: TimeSeries,
                     price: PriceOptions,
                     opts: SolverOptions,
                     M: int,
                     grid: Optional[LambdaGrid] = None,
                     rule: SelectionRule = SelectionRule(),
                     holdout: float = 0.2,
                     max_workers: Optional[int] = None) -> pd.DataFrame:
    """
    按 price.step 滑动长度为 price.window 的窗口，逐窗口运行选择流水线

    Args:
        X: 对数收益序列
        price: 窗口与 RV 参数
        opts: 求解器参数
        M: 滞后阶数
        grid: 固定 λ₁ 网格，None 时每个窗口用自己的 λ_max 对数网格
        rule: 选择规则
        holdout: 窗口内的留出比例
        max_workers: 扫描并发上限

    Returns:
        每个窗口一行：窗口起止、边数、稀疏度 %（非零边占 N²）、λ₁、窗口末端的市场 log(RV)；
        失败的窗口 error 非空、其余字段为空
    """
    K = X.n_samples
    if K < price.window:
        raise InsufficientDataError(f"序列长度 {K} 不足一个窗口 ({price.window})")
    rv_window = min(price.rv_window, K)
    market = realized_variance(X, price.rv_decay, rv_window).market_log_rv

    records = []
    for start in range(0, K - price.window + 1, price.step):
        end = start + price.window
        record = {"window_start": start, "window_end": end - 1, "market_log_rv": market[end - 1]}
        try:
            outcome = select_and_fit(X.window(start, end), M, opts, grid=grid, rule=rule, holdout=holdout,
                                     max_workers=max_workers)
            A = outcome.fit.A
            record.update(edge_count=A.edge_count, sparsity_pct=A.density * 100.0,
                          lambda1=outcome.report.lambda1, lambda_refit=outcome.lambda_refit, error=None)
            logger.info(f"窗口 [{start}, {end}): 边数={A.edge_count}, 稀疏度={A.density * 100:.3f}%")
        except CgpError as e:
            logger.warning(f"窗口 [{start}, {end}) 失败，记为空缺: {e.category}: {e.message}")
            record.update(error=f"{e.category}: {e.message}")
        records.append(record)

    table = pd.DataFrame.from_records(records, columns=ROLLING_COLUMNS)
    table["edge_count"] = table["edge_count"].astype("Int64")
    table["market_log_rv"] = table["market_log_rv"].astype(np.float64)
    return table
