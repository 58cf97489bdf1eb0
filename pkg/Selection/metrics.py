"""
模型选择指标

- err / err^d：按节点出边归一化的逐边预测误差（只用 lag-1）
- AIC / BIC：高斯对数似然形式，p = 非零边数
- mse_out：留出窗口上的一步预测 MSE

未定义的取值统一用 NaN 表示（A ≡ 0 时的 err 指标，RSS = 0 时的信息准则）。
"""

import logging
import math
from typing import Tuple

import numpy as np

from Core.cgp_model import AdjacencyMatrix, LagCoefficients, TimeSeries, lagged_design
from Core.errors import DimensionError, InsufficientDataError
from Solver.ccd_solver import in_sample_mse, residual_matrix

logger = logging.getLogger("cgp.metrics")

UNDEFINED = math.nan


def _check_inputs(X: TimeSeries, A: AdjacencyMatrix, M: int) -> None:
    if A.n_nodes != X.n_nodes:
        raise DimensionError(f"邻接矩阵维度 {A.n_nodes} 与节点数 {X.n_nodes} 不一致")
    if X.n_samples <= M:
        raise InsufficientDataError(f"样本数 K = {X.n_samples} 必须大于滞后阶数 M = {M}")


def _node_errors(X: TimeSeries, A: AdjacencyMatrix, M: int) -> np.ndarray:
    """
    每个节点 j 的出边误差和 Σ_{i: A_ij≠0} Σ_k (x_i(k) − A_ij x_j(k-1))²

    按列直接计算残差，结果非负。
    """
    target, lags = lagged_design(X, M)
    lag1 = lags[0]
    weights = A.weights
    support = A.support()
    per_node = np.zeros(A.n_nodes)
    for j in np.flatnonzero(support.any(axis=0)):
        rows = support[:, j]
        residual = target[rows] - np.outer(weights[rows, j], lag1[j])
        per_node[j] = float(np.sum(residual * residual))
    return per_node


def _normalized_error(X: TimeSeries, A: AdjacencyMatrix, M: int, normalizer: np.ndarray) -> float:
    _check_inputs(X, A, M)
    active = A.support().any(axis=0)
    if not active.any():
        return UNDEFINED
    per_node = _node_errors(X, A, M)
    T = X.n_samples - M
    return float(np.sum(per_node[active] / normalizer[active])) / T


def err_metric(X: TimeSeries, A: AdjacencyMatrix, M: int) -> float:
    """
    整图误差：对有出边的节点 j，按出边数归一化其各条边的预测误差后求和

    Args:
        X: 时间序列
        A: 邻接矩阵
        M: 滞后阶数（误差窗口 k = M..K-1）

    Returns:
        非负实数；A ≡ 0 时为 NaN
    """
    return _normalized_error(X, A, M, A.out_degree().astype(np.float64))


def err_degree_metric(X: TimeSeries, A: AdjacencyMatrix, M: int) -> float:
    """同 err_metric，但归一化因子为绝对出度 Σ_i |A_ij|"""
    return _normalized_error(X, A, M, np.abs(A.weights).sum(axis=0))


def information_criteria(X: TimeSeries, R: LagCoefficients, A: AdjacencyMatrix, M: int) -> Tuple[float, float]:
    """
    AIC = n·ln(RSS/n) + 2p，BIC = n·ln(RSS/n) + p·ln(n)

    Args:
        X: 时间序列
        R: 完整的滞后系数模型（用于计算 RSS）
        A: 提取出的邻接矩阵（p = 非零边数）
        M: 滞后阶数

    Returns:
        (aic, bic)；RSS = 0 时均为 NaN
    """
    residual = residual_matrix(X, R, M)
    n = residual.size
    rss = float(np.sum(residual * residual))
    if rss <= 0.0:
        return UNDEFINED, UNDEFINED
    p = A.edge_count
    log_likelihood_term = n * math.log(rss / n)
    return log_likelihood_term + 2.0 * p, log_likelihood_term + p * math.log(n)


def mse_out(X_train: TimeSeries, X_test: TimeSeries, R: LagCoefficients, M: int) -> float:
    """
    留出窗口上的一步预测 MSE

    Args:
        X_train: 训练窗口（只用于维度校验）
        X_test: 留出窗口，长度需 > M
        R: 在训练窗口上拟合的滞后系数
        M: 滞后阶数

    Returns:
        非负实数
    """
    if X_train.n_nodes != X_test.n_nodes:
        raise DimensionError(f"训练窗口节点数 {X_train.n_nodes} 与留出窗口 {X_test.n_nodes} 不一致")
    if X_test.n_samples <= M:
        raise InsufficientDataError(f"留出窗口长度 {X_test.n_samples} 必须大于滞后阶数 M = {M}")
    return in_sample_mse(X_test, R, M)
