"""
已实现方差（RV）

RV_i(k) = Σ_{t=0}^{window-1} w_t · x_i(k-t)²，w_t ∝ decay^t 且 Σ w_t = 1；
市场指标为各节点 ln RV_i(k) 的均值。k < window-1 的位置未定义（NaN）。
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from Core.cgp_model import TimeSeries
from Core.errors import ConfigError, InsufficientDataError


@dataclass(frozen=True)
class RealizedVariance:
    rv: np.ndarray
    market_log_rv: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.market_log_rv)


def ewma_weights(decay: float, window: int) -> np.ndarray:
    """按滞后 t = 0..window-1 排列的归一化指数权重"""
    weights = decay ** np.arange(window, dtype=np.float64)
    return weights / weights.sum()


def realized_variance(X: TimeSeries, decay: float = 0.99, window: int = 40) -> RealizedVariance:
    """
    计算逐节点、逐时刻的指数加权已实现方差

    Args:
        X: 对数收益序列
        decay: 指数衰减系数 (0, 1)
        window: 窗口长度（≤ K）

    Returns:
        RealizedVariance；rv 为 N×K，market_log_rv 长度为 K
    """
    if not 0 < decay < 1:
        raise ConfigError(f"decay 必须在 (0, 1) 内，实际: {decay}")
    if window < 1:
        raise ConfigError(f"窗口长度必须 ≥ 1，实际: {window}")
    if window > X.n_samples:
        raise InsufficientDataError(f"窗口长度 {window} 超过样本数 {X.n_samples}")

    squared = X.values ** 2
    # windows[..., s] 对应 x(k - window + 1 + s)，权重需要倒序对齐
    windows = sliding_window_view(squared, window, axis=1)
    weights = ewma_weights(decay, window)[::-1]
    rv = np.full(X.values.shape, np.nan)
    rv[:, window - 1:] = windows @ weights

    market = np.full(X.n_samples, np.nan)
    with np.errstate(divide="ignore"):
        market[window - 1:] = np.mean(np.log(rv[:, window - 1:]), axis=0)
    return RealizedVariance(rv=rv, market_log_rv=market)
