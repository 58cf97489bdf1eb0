"""
多项式系数 C 的坐标下降

固定 Â 后，对每个自由系数 c_{l,j}（l ≥ 2）做带 L1/L2 正则的坐标更新：
    c_{l,j} = S(<Z_{l,j}, y − w>, Tλ₁ᶜ) / (<Z_{l,j}, Z_{l,j}> + 2Tλ₂ᶜ)
其中 T = K − M，y_k = x(k) − Âx(k-1)，Z_{l,j} = Âʲ x(k-l)。
所有 Z 之间的内积在循环外一次算好（q×q Gram）。
"""

import logging
from typing import List, Tuple

import numpy as np

from Core.cgp_model import AdjacencyMatrix, PolyCoefficients, TimeSeries, lagged_design
from Core.errors import DimensionError, InsufficientDataError, OutOfRangeError
from .ccd_solver import soft_threshold
from .options import SolverOptions

logger = logging.getLogger("cgp.poly")


def _design(X: TimeSeries, A_hat: AdjacencyMatrix, M: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    """返回 y 与按 free_indices 排列的 Z_{l,j} 列表"""
    target, lags = lagged_design(X, M)
    weights = A_hat.weights
    y = target - weights @ lags[0]

    features: List[np.ndarray] = []
    for l in range(2, M + 1):
        power = lags[l - 1]
        features.append(power)
        for _ in range(1, l + 1):
            power = weights @ power
            features.append(power)
    return y, features


def _check_inputs(X: TimeSeries, A_hat: AdjacencyMatrix, M: int) -> None:
    if M < 1:
        raise OutOfRangeError(f"滞后阶数必须 ≥ 1，实际: {M}")
    if A_hat.n_nodes != X.n_nodes:
        raise DimensionError(f"邻接矩阵维度 {A_hat.n_nodes} 与节点数 {X.n_nodes} 不一致")
    if X.n_samples <= M:
        raise InsufficientDataError(f"样本数 K = {X.n_samples} 必须大于滞后阶数 M = {M}")


def c_stage_objective(X: TimeSeries, A_hat: AdjacencyMatrix, C: PolyCoefficients, opts: SolverOptions) -> float:
    """
    C 阶段目标：½ Σ‖y − Σ c Z‖² + Tλ₁ᶜ‖c‖₁ + Tλ₂ᶜ‖c‖²

    Args:
        X: 时间序列
        A_hat: 估计的邻接矩阵
        C: 多项式系数（M = C.n_lags）
        opts: 求解器参数

    Returns:
        目标函数值
    """
    M = C.n_lags
    _check_inputs(X, A_hat, M)
    y, features = _design(X, A_hat, M)
    coeffs = C.free_vector()
    residual = y.copy()
    for value, feature in zip(coeffs, features):
        residual -= value * feature
    T = X.n_samples - M
    return (0.5 * float(np.sum(residual * residual))
            + T * opts.lambda1_c * float(np.sum(np.abs(coeffs)))
            + T * opts.lambda2_c * float(np.sum(coeffs * coeffs)))


def fit_C(X: TimeSeries, A_hat: AdjacencyMatrix, M: int, opts: SolverOptions) -> PolyCoefficients:
    """
    估计多项式系数 C（第一阶固定为 (0, 1)）

    Args:
        X: 时间序列
        A_hat: 估计的邻接矩阵
        M: 滞后阶数
        opts: 求解器参数（lambda1_c / lambda2_c / epsilon / max_iterations）

    Returns:
        PolyCoefficients
    """
    _check_inputs(X, A_hat, M)
    if M == 1:
        return PolyCoefficients.trivial(1)

    y, features = _design(X, A_hat, M)
    T = X.n_samples - M
    stacked = np.stack([f.ravel() for f in features])
    gram = stacked @ stacked.T
    correlation = stacked @ y.ravel()

    threshold = T * opts.lambda1_c
    denominators = np.diag(gram) + 2.0 * T * opts.lambda2_c
    coeffs = np.zeros(len(features))

    sweeps = 0
    for sweeps in range(1, opts.max_iterations + 1):
        previous = coeffs.copy()
        for p in range(len(coeffs)):
            if denominators[p] == 0:
                coeffs[p] = 0.0
                continue
            # <Z_p, y − w>，w 不含第 p 项
            numerator = correlation[p] - gram[p] @ coeffs + gram[p, p] * coeffs[p]
            coeffs[p] = soft_threshold(numerator, threshold) / denominators[p]
        change = float(np.sum(np.abs(coeffs - previous)))
        if change < opts.epsilon:
            break

    logger.debug(f"fit_C 完成: M={M}, 轮数={sweeps}, 非零系数={int(np.count_nonzero(coeffs))}/{len(coeffs)}")
    return PolyCoefficients.from_free_vector(M, coeffs)
