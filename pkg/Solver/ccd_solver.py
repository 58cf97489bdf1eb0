"""
循环坐标下降（CCD）求解器

块坐标下降估计 R_1..R_M：
- R_1 按列做带软阈值的坐标更新（LASSO）
- R_i（i > 1）整矩阵闭式更新，分母来自 GramCache
- 四个停止条件：最大迭代 / 参数变化 / MSE 变化 / MSE 上升（回退到上一迭代），默认按相对阈值判断
- 循环结束后再跑一遍列 CCD 得到邻接矩阵 A
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from Core.cgp_model import AdjacencyMatrix, LagCoefficients, PolyCoefficients, TimeSeries, lagged_design
from Core.errors import DimensionError, InsufficientDataError, OutOfRangeError
from .gram_cache import GramCache, build_gram_cache
from .options import SolverOptions

logger = logging.getLogger("cgp.solver")

# λ_max 的相对上浮量，覆盖不同求和顺序带来的舍入差
LAMBDA_MAX_SLACK = 1e-12


class StopReason(str, Enum):
    MAX_ITER = "max_iter"
    PARAM_DELTA = "param_delta"
    MSE_DELTA = "mse_delta"
    MSE_INCREASE = "mse_increase"


@dataclass(frozen=True)
class SolverDiagnostics:
    """求解诊断信息"""

    ridge: Dict[int, float] = field(default_factory=dict)
    dead_columns: Tuple[int, ...] = ()


@dataclass(frozen=True)
class RStageResult:
    """compute_R 的输出：滞后系数、邻接矩阵与停止信息"""

    R: LagCoefficients
    A: AdjacencyMatrix
    n_sweeps: int
    stop_reason: StopReason
    objective_trace: Tuple[float, ...]
    mse_trace: Tuple[float, ...]
    lambda1: float
    diagnostics: SolverDiagnostics


@dataclass(frozen=True)
class FitResult:
    """完整块坐标下降结果（R, A, C）"""

    R: LagCoefficients
    A: AdjacencyMatrix
    C: PolyCoefficients
    n_sweeps: int
    stop_reason: StopReason
    objective_trace: Tuple[float, ...]
    mse_trace: Tuple[float, ...]
    lambda1: float
    diagnostics: SolverDiagnostics


def soft_threshold(a: Union[float, np.ndarray], b: float) -> Union[float, np.ndarray]:
    """软阈值 S(a, b) = sign(a)·max(|a| − b, 0)"""
    out = np.sign(a) * np.maximum(np.abs(a) - b, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _check_fit_inputs(X: TimeSeries, M: int) -> None:
    if M < 1:
        raise OutOfRangeError(f"滞后阶数必须 ≥ 1，实际: {M}")
    if X.n_samples <= M:
        raise InsufficientDataError(f"样本数 K = {X.n_samples} 必须大于滞后阶数 M = {M}")


def residual_matrix(X: TimeSeries, R: LagCoefficients, M: Optional[int] = None) -> np.ndarray:
    """
    残差矩阵 x(k) − Σ_l R_l x(k-l)，k = M..K-1

    Args:
        X: 时间序列
        R: 滞后系数
        M: 起始时间（默认 R.n_lags，需 ≥ R.n_lags）

    Returns:
        N×(K-M) 残差
    """
    M = R.n_lags if M is None else M
    if M < R.n_lags:
        raise DimensionError(f"窗口起点 M = {M} 小于滞后阶数 {R.n_lags}")
    if R.n_nodes != X.n_nodes:
        raise DimensionError(f"滞后系数维度 {R.n_nodes} 与节点数 {X.n_nodes} 不一致")
    _check_fit_inputs(X, M)
    target, lags = lagged_design(X, M)
    residual = target.copy()
    for l, mat in enumerate(R.mats, start=1):
        residual -= mat @ lags[l - 1]
    return residual


def in_sample_mse(X: TimeSeries, R: LagCoefficients, M: Optional[int] = None) -> float:
    """样本内 MSE：mean_k ‖x(k) − 预测‖² / N"""
    residual = residual_matrix(X, R, M)
    return float(np.sum(residual * residual)) / residual.size


def lambda_max(X: TimeSeries, M: int) -> float:
    """从 R = 0 开始第一轮即把 R_1 所有列置零的最小 λ₁"""
    _check_fit_inputs(X, M)
    target, lags = lagged_design(X, M)
    return float(np.max(np.abs(target @ lags[0].T))) * (1.0 + LAMBDA_MAX_SLACK)


def update_Ri(i: int, X: TimeSeries, R: LagCoefficients, cache: GramCache) -> np.ndarray:
    """
    R_i（i > 1）的闭式更新：(Σ_k S_k^i x(k-i)ᵀ)(G_i + 2λ₂I)⁻¹

    Args:
        i: 滞后编号（2 ≤ i ≤ M）
        X: 时间序列
        R: 当前滞后系数
        cache: 为 X 构建的 Gram 缓存

    Returns:
        新的 R_i（由调用方写回）
    """
    M = R.n_lags
    if not 2 <= i <= M:
        raise OutOfRangeError(f"update_Ri 需要 2 ≤ i ≤ {M}，实际 i = {i}")
    if cache.n_lags != M:
        raise DimensionError(f"Gram 缓存的滞后阶数 {cache.n_lags} 与 R 的 {M} 不一致")
    target, lags = lagged_design(X, M)
    partial = target.copy()
    for l, mat in enumerate(R.mats, start=1):
        if l != i:
            partial -= mat @ lags[l - 1]
    return (partial @ lags[i - 1].T) @ cache.inverse(i)


def update_R1_column(j: int, X: TimeSeries, R: LagCoefficients, lambda1: float, cache: GramCache) -> np.ndarray:
    """
    R_1 第 j 列的软阈值更新

    Args:
        j: 节点编号（0 起始）
        X: 时间序列
        R: 当前滞后系数
        lambda1: LASSO 权重
        cache: Gram 缓存

    Returns:
        新的第 j 列（由调用方写回）；死列返回零向量
    """
    M = R.n_lags
    if not 0 <= j < R.n_nodes:
        raise OutOfRangeError(f"列编号 {j} 不在 [0, {R.n_nodes}) 内")
    d_j = cache.d[j]
    if d_j == 0:
        logger.warning(f"节点 {j} 在窗口内恒为零，第 {j} 列置零")
        return np.zeros(R.n_nodes)
    target, lags = lagged_design(X, M)
    partial = target.copy()
    for l, mat in enumerate(R.mats, start=1):
        partial -= mat @ lags[l - 1]
    lag_row = lags[0][j]
    partial += np.outer(R.mats[0][:, j], lag_row)
    numerator = partial @ lag_row
    return soft_threshold(numerator, lambda1) / d_j


class _CcdState:
    """CCD 可变状态：滞后系数与维护中的残差 E = x(k) − Σ R_l x(k-l)"""

    def __init__(self, X: TimeSeries, M: int, cache: GramCache):
        self.target, self.lags = lagged_design(X, M)
        self.cache = cache
        n = X.n_nodes
        self.R: List[np.ndarray] = [np.zeros((n, n)) for _ in range(M)]
        self.E = self.target.copy()

    def sweep_columns(self, lambda1: float) -> None:
        """按 j = 0..N-1 升序更新 R_1 的每一列"""
        R1 = self.R[0]
        lag1 = self.lags[0]
        d = self.cache.d
        for j in range(R1.shape[1]):
            old = R1[:, j].copy()
            if d[j] == 0:
                new = np.zeros_like(old)
            else:
                numerator = self.E @ lag1[j] + old * d[j]
                new = soft_threshold(numerator, lambda1) / d[j]
            delta = new - old
            if np.any(delta):
                self.E -= np.outer(delta, lag1[j])
                R1[:, j] = new

    def update_lag(self, i: int) -> None:
        lag = self.lags[i - 1]
        partial = self.E + self.R[i - 1] @ lag
        new = (partial @ lag.T) @ self.cache.inverse(i)
        self.E = partial - new @ lag
        self.R[i - 1] = new

    def refresh_residual(self) -> None:
        """按当前 R 重新计算残差，避免增量更新的舍入累积"""
        residual = self.target.copy()
        for mat, lag in zip(self.R, self.lags):
            residual -= mat @ lag
        self.E = residual

    def snapshot(self) -> List[np.ndarray]:
        return [mat.copy() for mat in self.R]

    def restore(self, mats: List[np.ndarray]) -> None:
        self.R = [mat.copy() for mat in mats]
        self.refresh_residual()

    def sse(self) -> float:
        return float(np.sum(self.E * self.E))

    def mse(self) -> float:
        return self.sse() / self.E.size

    def objective(self, lambda1: float) -> float:
        """R 阶段目标：½ Σ‖残差‖² + λ₁‖R_1‖₁"""
        return 0.5 * self.sse() + lambda1 * float(np.sum(np.abs(self.R[0])))


def _coefficient_norm(mats: List[np.ndarray]) -> float:
    return sum(float(np.sum(np.abs(mat))) for mat in mats)


def _stop_reason(opts: SolverOptions, sweep: int, delta: float, norm: float,
                 mse: float, mse_prev: float) -> Optional[StopReason]:
    """
    按 MSE 上升 / 参数变化 / MSE 变化的顺序判断本轮是否停止

    relative 模式下阈值按当前系数范数与上一轮 MSE 缩放，
    且 MSE 两条判据在前 min_sweeps 轮不生效。

    Args:
        opts: 求解器参数
        sweep: 当前轮次（1 起始）
        delta: 本轮 ‖R_new − R_old‖₁
        norm: 本轮 ‖R_new‖₁
        mse: 本轮 MSE
        mse_prev: 上一轮 MSE

    Returns:
        停止原因，继续迭代时为 None
    """
    if opts.tolerance == "absolute":
        if mse > mse_prev:
            return StopReason.MSE_INCREASE
        if delta < opts.epsilon:
            return StopReason.PARAM_DELTA
        if abs(mse - mse_prev) < opts.epsilon:
            return StopReason.MSE_DELTA
        return None

    mse_active = sweep >= opts.min_sweeps
    mse_tol = opts.relative_epsilon * mse_prev
    if mse_active and mse > mse_prev + mse_tol:
        return StopReason.MSE_INCREASE
    if delta <= opts.relative_epsilon * norm:
        return StopReason.PARAM_DELTA
    if mse_active and abs(mse - mse_prev) <= mse_tol:
        return StopReason.MSE_DELTA
    return None


def compute_R(
X: TimeSeries, M: int, opts: SolverOptions, cache: Optional[GramCache] = None) -> RStageResult:
    """
    CCD 计算滞后系数 R 并提取邻接矩阵 A

    Args:
        X: 时间序列
        M: 滞后阶数
        opts: 求解器参数
        cache: 可复用的 Gram 缓存（同一 X 上扫描多个 λ₁ 时传入）

    Returns:
        RStageResult
    """
    _check_fit_inputs(X, M)
    if cache is None:
        cache = build_gram_cache(X, M, opts.ridge_lambda2)
    elif cache.n_lags != M or cache.d.shape[0] != X.n_nodes:
        raise DimensionError("Gram 缓存与输入序列/滞后阶数不匹配")

    lambda1 = opts.lambda1
    state = _CcdState(X, M, cache)
    mse_prev = state.mse()
    objective_trace: List[float] = []
    mse_trace: List[float] = []
    stop_reason = StopReason.MAX_ITER
    n_sweeps = 0

    for sweep in range(1, opts.max_iterations + 1):
        n_sweeps = sweep
        previous = state.snapshot()

        state.sweep_columns(lambda1)
        for i in range(2, M + 1):
            state.update_lag(i)
        state.refresh_residual()

        mse = state.mse()
        objective_trace.append(state.objective(lambda1))
        mse_trace.append(mse)
        delta = sum(float(np.sum(np.abs(new - old))) for new, old in zip(state.R, previous))
        logger.debug(f"第 {sweep} 轮: objective={objective_trace[-1]:.6e}, mse={mse:.6e}, ΔR={delta:.3e}")

        reason = _stop_reason(opts, sweep, delta, _coefficient_norm(state.R), mse, mse_prev)
        if reason is StopReason.MSE_INCREASE:
            state.restore(previous)
        if reason is not None:
            stop_reason = reason
            break
        mse_prev = mse

    R = LagCoefficients(tuple(state.snapshot()))
    # 额外一轮列 CCD 得到邻接矩阵
    state.sweep_columns(lambda1)
    A = AdjacencyMatrix(state.R[0].copy())

    logger.info(f"CCD 结束: λ₁={lambda1:g}, 轮数={n_sweeps}, 停止原因={stop_reason.value}, 边数={A.edge_count}")
    return RStageResult(
        R=R,
        A=A,
        n_sweeps=n_sweeps,
        stop_reason=stop_reason,
        objective_trace=tuple(objective_trace),
        mse_trace=tuple(mse_trace),
        lambda1=lambda1,
        diagnostics=SolverDiagnostics(ridge=dict(cache.ridge), dead_columns=cache.dead_columns),
    )


def fit_cgp(X: TimeSeries, M: int, opts: SolverOptions, cache: Optional[GramCache] = None) -> FitResult:
    """完整块坐标下降：compute_R → 提取 A → fit_C"""
    from .poly_fit import fit_C

    stage = compute_R(X, M, opts, cache)
    C = fit_C(X, stage.A, M, opts)
    return FitResult(
        R=stage.R,
        A=stage.A,
        C=C,
        n_sweeps=stage.n_sweeps,
        stop_reason=stage.stop_reason,
        objective_trace=stage.objective_trace,
        mse_trace=stage.mse_trace,
        lambda1=stage.lambda1,
        diagnostics=stage.diagnostics,
    )
