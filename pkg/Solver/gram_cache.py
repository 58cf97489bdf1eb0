"""
Gram 矩阵缓存模块

CCD 循环外预先计算：
- 每个滞后的 Gram 矩阵 G_i = Σ_k x(k-i) x(k-i)ᵀ（k = M..K-1）
- i > 1 时 (G_i + 2λ₂I)⁻¹，奇异时按 ×10 升级 λ₂
- R_1 列更新的分母 d_j = Σ_k (x^j(k-1))²
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
import scipy.linalg

from Core.cgp_model import TimeSeries, lagged_design
from Core.errors import CgpError, InsufficientDataError, OutOfRangeError

logger = logging.getLogger("cgp.gram")

# 逆矩阵校验容差 ‖(G + 2λ₂I)·inv − I‖_∞
INVERSE_TOLERANCE = 1e-8
RIDGE_BASE_FACTOR = 1e-10
MAX_RIDGE_ESCALATIONS = 60


@dataclass(frozen=True)
class GramCache:
    """CCD 分母缓存（只读）"""

    n_lags: int
    grams: Tuple[np.ndarray, ...]
    inverses: Dict[int, np.ndarray]
    ridge: Dict[int, float]
    d: np.ndarray
    dead_columns: Tuple[int, ...]

    def gram(self, i: int) -> np.ndarray:
        if not 1 <= i <= self.n_lags:
            raise OutOfRangeError(f"滞后编号 {i} 不在 [1, {self.n_lags}] 内")
        return self.grams[i - 1]

    def inverse(self, i: int) -> np.ndarray:
        if i not in self.inverses:
            raise OutOfRangeError(f"只缓存了 i ∈ [2, {self.n_lags}] 的逆矩阵，请求 i = {i}")
        return self.inverses[i]


def _try_inverse(gram: np.ndarray, lam: float):
    """尝试对 G + 2λI 做 Cholesky 求逆，失败或校验不过返回 None"""
    n = gram.shape[0]
    identity = np.eye(n)
    regularized = gram + 2.0 * lam * identity
    try:
        factor = scipy.linalg.cho_factor(regularized, lower=False, check_finite=False)
        inverse = scipy.linalg.cho_solve(factor, identity, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(inverse)):
        return None
    if np.max(np.abs(regularized @ inverse - identity)) > INVERSE_TOLERANCE:
        return None
    return inverse


def regularized_inverse(gram: np.ndarray, start: float = 0.0) -> Tuple[float, np.ndarray]:
    """
    求 (G + 2λ₂I)⁻¹，使用能让矩阵非奇异的最小 λ₂

    从 start 开始；失败则从 1e-10·trace(G)/N 起每次乘 10。

    Returns:
        (λ₂, 逆矩阵)
    """
    inverse = _try_inverse(gram, start)
    if inverse is not None:
        return start, inverse

    n = gram.shape[0]
    scale = float(np.trace(gram)) / n
    lam = RIDGE_BASE_FACTOR * (scale if scale > 0 else 1.0)
    if start >= lam:
        lam = start * 10.0
    for _ in range(MAX_RIDGE_ESCALATIONS):
        inverse = _try_inverse(gram, lam)
        if inverse is not None:
            return lam, inverse
        lam *= 10.0
    raise CgpError(f"Gram 矩阵正则化失败: λ₂ 升级到 {lam:g} 仍无法求逆")


def build_gram_cache(X: TimeSeries, M: int, ridge_lambda2: Union[str, float] = "auto") -> GramCache:
    """
    构建 Gram 缓存

    Args:
        X: 时间序列
        M: 滞后阶数
        ridge_lambda2: 'auto'（先试 λ₂ = 0）或固定的非负 λ₂

    Returns:
        GramCache
    """
    if M < 1:
        raise OutOfRangeError(f"滞后阶数必须 ≥ 1，实际: {M}")
    if X.n_samples <= M:
        raise InsufficientDataError(f"样本数 K = {X.n_samples} 必须大于滞后阶数 M = {M}")

    _, lags = lagged_design(X, M)
    grams = tuple(np.dot(lag, lag.T) for lag in lags)
    d = np.einsum("jk,jk->j", lags[0], lags[0])
    dead = tuple(int(j) for j in np.flatnonzero(d == 0))
    if dead:
        logger.warning(f"检测到恒为零的节点（死列）: {list(dead)}，对应列将被置零")

    start = 0.0 if ridge_lambda2 == "auto" else float(ridge_lambda2)
    inverses: Dict[int, np.ndarray] = {}
    ridge: Dict[int, float] = {}
    for i in range(2, M + 1):
        lam, inverse = regularized_inverse(grams[i - 1], start)
        if lam != start:
            logger.warning(f"G_{i} 奇异，岭参数 λ₂ 升级为 {lam:.3e}")
        inverses[i] = inverse
        ridge[i] = lam

    return GramCache(n_lags=M, grams=grams, inverses=inverses, ridge=ridge, d=d, dead_columns=dead)
