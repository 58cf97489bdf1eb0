"""
CGP前向模型模块

核心功能：
- 领域类型：TimeSeries / LagCoefficients / AdjacencyMatrix / PolyCoefficients / NoiseSpec
- 图滤波 P_l(A) = Σ_j c_{l,j} A^j（Horner 累乘，不做特征分解）
- 一步预测 Σ_l R_l x(k-l)
- 噪声驱动的 CGP 模拟（含 burn-in 与溢出保护）

约定：邻接矩阵元素 (i, j) 表示边 j → i 的权重，第 j 列是节点 j 的出边。
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    InstabilityError,
    NonFiniteInputError,
    OutOfRangeError,
)

logger = logging.getLogger("cgp.model")

# 模拟信号的溢出保护阈值
OVERFLOW_GUARD = 1e12


def _as_readonly(array: np.ndarray) -> np.ndarray:
    """复制为只读 float64 数组"""
    out = np.array(array, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeSeries:
    """N×K 节点信号矩阵（行 = 节点，列 = 时间）"""

    values: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[np.newaxis, :]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionError(f"时间序列必须是非空的 N×K 矩阵，实际形状: {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteInputError(f"时间序列包含非有限值: 节点 {bad[0]}, 时间 {bad[1]}")
        object.__setattr__(self, "values", _as_readonly(values))

        if self.labels is None:
            object.__setattr__(self, "labels", tuple(f"node_{i}" for i in range(values.shape[0])))
        else:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != values.shape[0]:
                raise DimensionError(f"标签数量 {len(labels)} 与节点数 {values.shape[0]} 不一致")
            object.__setattr__(self, "labels", labels)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def window(self, start: int, stop: int) -> "TimeSeries":
        """截取时间窗 [start, stop)"""
        if not 0 <= start < stop <= self.n_samples:
            raise OutOfRangeError(f"时间窗 [{start}, {stop}) 超出序列长度 {self.n_samples}")
        return TimeSeries(self.values[:, start:stop], self.labels)


@dataclass(frozen=True)
class LagCoefficients:
    """M 个稠密 N×N 滞后系数矩阵 R_1..R_M（mats[0] 即 R_1）"""

    mats: Tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=np.float64) for m in self.mats)
        if not mats:
            raise DimensionError("滞后系数至少需要一个矩阵 (M ≥ 1)")
        n = mats[0].shape[0]
        for lag, mat in enumerate(mats, start=1):
            if mat.shape != (n, n):
                raise DimensionError(f"R_{lag} 形状 {mat.shape} 与 ({n}, {n}) 不一致")
            if not np.all(np.isfinite(mat)):
                raise NonFiniteInputError(f"R_{lag} 包含非有限值")
        object.__setattr__(self, "mats", tuple(_as_readonly(m) for m in mats))

    @classmethod
    def zeros(cls, n_lags: int, n_nodes: int) -> "LagCoefficients":
        return cls(tuple(np.zeros((n_nodes, n_nodes)) for _ in range(n_lags)))

    @property
    def n_lags(self) -> int:
        return len(self.mats)

    @property
    def n_nodes(self) -> int:
        return self.mats[0].shape[0]

    def lag(self, l: int) -> np.ndarray:
        """按 1 起始的滞后编号取 R_l"""
        if not 1 <= l <= self.n_lags:
            raise OutOfRangeError(f"滞后编号 {l} 不在 [1, {self.n_lags}] 内")
        return self.mats[l - 1]

    def stacked(self) -> np.ndarray:
        """返回 M×N×N 副本"""
        return np.stack(self.mats).copy()


@dataclass(frozen=True)
class AdjacencyMatrix:
    """有向带符号邻接矩阵，精确零表示无边"""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise DimensionError(f"邻接矩阵必须是方阵，实际形状: {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise NonFiniteInputError("邻接矩阵包含非有限值")
        object.__setattr__(self, "weights", _as_readonly(weights))

    @classmethod
    def empty(cls, n_nodes: int) -> "AdjacencyMatrix":
        return cls(np.zeros((n_nodes, n_nodes)))

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def density(self) -> float:
        """非零边占 N² 的比例"""
        return self.edge_count / float(self.n_nodes ** 2)

    def support(self) -> np.ndarray:
        return self.weights != 0

    def out_degree(self) -> np.ndarray:
        """每列（每个源节点）的出边数"""
        return np.count_nonzero(self.weights, axis=0)


class PolyCoefficients:
    """
    多项式系数三角表 c_{l,j}，l = 1..M，j = 0..l

    (c_{1,0}, c_{1,1}) 恒为 (0, 1)，只有 l ≥ 2 的系数是自由参数。
    """

    def __init__(self, n_lags: int, values: Optional[Mapping[Tuple[int, int], float]] = None):
        if n_lags < 1:
            raise ConfigError(f"滞后阶数必须 ≥ 1，实际: {n_lags}")
        self._table = np.zeros((n_lags, n_lags + 1))
        self._table[0, 1] = 1.0
        for (l, j), value in (values or {}).items():
            if l == 1:
                fixed = 1.0 if j == 1 else 0.0
                if j not in (0, 1) or float(value) != fixed:
                    raise ConfigError(f"第一阶系数固定为 (0, 1)，不能设置 c[1,{j}] = {value}")
                continue
            self._check_index(l, j, n_lags)
            if not np.isfinite(value):
                raise NonFiniteInputError(f"c[{l},{j}] 不是有限值")
            self._table[l - 1, j] = float(value)
        self._table.flags.writeable = False

    @staticmethod
    def _check_index(l: int, j: int, n_lags: int) -> None:
        if not (1 <= l <= n_lags and 0 <= j <= l):
            raise OutOfRangeError(f"系数索引 ({l}, {j}) 超出三角表范围 (M = {n_lags})")

    @classmethod
    def trivial(cls, n_lags: int) -> "PolyCoefficients":
        """只有固定的第一阶，其余系数为零"""
        return cls(n_lags)

    @classmethod
    def from_free_vector(cls, n_lags: int, vector: Sequence[float]) -> "PolyCoefficients":
        """按 free_indices 的顺序从向量构造"""
        indices = cls.free_indices_for(n_lags)
        if len(vector) != len(indices):
            raise DimensionError(f"自由系数向量长度 {len(vector)} 与 {len(indices)} 不一致")
        return cls(n_lags, dict(zip(indices, (float(v) for v in vector))))

    @staticmethod
    def free_indices_for(n_lags: int) -> List[Tuple[int, int]]:
        """自由系数 (l, j)，按字典序升序"""
        return [(l, j) for l in range(2, n_lags + 1) for j in range(l + 1)]

    @property
    def n_lags(self) -> int:
        return self._table.shape[0]

    def free_indices(self) -> List[Tuple[int, int]]:
        return self.free_indices_for(self.n_lags)

    def free_vector(self) -> np.ndarray:
        return np.array([self[idx] for idx in self.free_indices()])

    def __getitem__(self, index: Tuple[int, int]) -> float:
        l, j = index
        self._check_index(l, j, self.n_lags)
        return float(self._table[l - 1, j])

    def row(self, l: int) -> np.ndarray:
        """第 l 阶的系数 c_{l,0..l}"""
        self._check_index(l, 0, self.n_lags)
        return self._table[l - 1, : l + 1].copy()

    def as_dict(self) -> Dict[str, float]:
        return {f"{l},{j}": self[(l, j)] for l in range(1, self.n_lags + 1) for j in range(l + 1)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyCoefficients):
            return NotImplemented
        return self.n_lags == other.n_lags and np.array_equal(self._table, other._table)

    def __repr__(self) -> str:
        return f"PolyCoefficients(M={self.n_lags}, free={self.free_vector().tolist()})"


@dataclass(frozen=True)
class NoiseSpec:
    """逐节点逐步独立的高斯噪声 N(0, sigma²)"""

    sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigError(f"噪声标准差必须 ≥ 0，实际: {self.sigma}")


def graph_filter(A: AdjacencyMatrix, coeffs: PolyCoefficients, l: int) -> np.ndarray:
    """
    计算图滤波 P_l(A) = Σ_{j=0}^{l} c_{l,j} A^j

    Args:
        A: 邻接矩阵
        coeffs: 多项式系数
        l: 滞后编号（1 ≤ l ≤ M）

    Returns:
        N×N 矩阵
    """
    weights = A.weights if isinstance(A, AdjacencyMatrix) else np.asarray(A, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
        raise DimensionError(f"图滤波需要方阵，实际形状: {weights.shape}")
    if not 1 <= l <= coeffs.n_lags:
        raise OutOfRangeError(f"滞后编号 {l} 不在 [1, {coeffs.n_lags}] 内")

    c = coeffs.row(l)
    identity = np.eye(weights.shape[0])
    # Horner: (((c_l A + c_{l-1}) A + ...) A + c_0)
    result = c[l] * identity
    for j in range(l - 1, -1, -1):
        result = result @ weights + c[j] * identity
    return result


def cgp_lag_matrices(A: AdjacencyMatrix, coeffs: PolyCoefficients) -> LagCoefficients:
    """由 (A, C) 展开得到 R_l = P_l(A)，l = 1..M"""
    return LagCoefficients(tuple(graph_filter(A, coeffs, l) for l in range(1, coeffs.n_lags + 1)))


def lagged_design(X: TimeSeries, n_lags: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    构造目标与滞后视图

    Returns:
        (target, lags): target 为 x(k)，k = M..K-1 的 N×(K-M) 视图；
        lags[l-1] 为对应的 x(k-l) 视图
    """
    values = X.values
    K = values.shape[1]
    target = values[:, n_lags:K]
    lags = [values[:, n_lags - l: K - l] for l in range(1, n_lags + 1)]
    return target, lags


def predict(X: TimeSeries, R: LagCoefficients, k: int) -> np.ndarray:
    """
    一步预测 Σ_{l=1}^{M} R_l x(k-l)

    Args:
        X: 时间序列
        R: 滞后系数
        k: 时间索引（M ≤ k ≤ K-1）

    Returns:
        长度为 N 的预测向量
    """
    if R.n_nodes != X.n_nodes:
        raise DimensionError(f"滞后系数维度 {R.n_nodes} 与节点数 {X.n_nodes} 不一致")
    if not R.n_lags <= k <= X.n_samples - 1:
        raise OutOfRangeError(f"时间索引 {k} 不在 [{R.n_lags}, {X.n_samples - 1}] 内")
    out = np.zeros(X.n_nodes)
    for l, mat in enumerate(R.mats, start=1):
        out += mat @ X.values[:, k - l]
    return out


def simulate(A: AdjacencyMatrix,
             C: PolyCoefficients,
             K: int,
             burn_in: int = 500,
             noise: Optional[NoiseSpec] = None,
             initial_history: Optional[np.ndarray] = None) -> TimeSeries:
    """
    按 CGP 递推生成 burn_in + K 步信号，丢弃前 burn_in 步

    Args:
        A: 邻接矩阵
        C: 多项式系数（M = C.n_lags）
        K: 保留的样本数
        burn_in: 预热步数
        noise: 噪声设定，None 表示默认 NoiseSpec()
        initial_history: 可选的 N×h 初始历史（h ≤ M，最后一列为 x(-1)），默认全零

    Returns:
        N×K 时间序列
    """
    if K < 1:
        raise ConfigError(f"样本数 K 必须 ≥ 1，实际: {K}")
    if burn_in < 0:
        raise ConfigError(f"burn_in 必须 ≥ 0，实际: {burn_in}")
    noise = noise or NoiseSpec()
    N = A.n_nodes
    M = C.n_lags
    total = burn_in + K

    # 堆叠成 N×(N·M)，与按 x(k-1), x(k-2), ... 排列的历史向量相乘
    filters = np.hstack([graph_filter(A, C, l) for l in range(1, M + 1)])

    buffer = np.zeros((N, M + total))
    if initial_history is not None:
        history = np.asarray(initial_history, dtype=np.float64)
        if history.ndim == 1:
            history = history[:, np.newaxis]
        if history.shape[0] != N or history.shape[1] > M:
            raise DimensionError(f"初始历史形状 {history.shape} 应为 ({N}, ≤{M})")
        buffer[:, M - history.shape[1]: M] = history

    rng = np.random.default_rng(noise.seed)
    innovations = rng.normal(0.0, noise.sigma, size=(total, N)) if noise.sigma > 0 else np.zeros((total, N))

    for step in range(total):
        idx = M + step
        history_vec = buffer[:, idx - M: idx][:, ::-1].T.reshape(-1)
        x = innovations[step] + filters @ history_vec
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > OVERFLOW_GUARD:
            raise InstabilityError(
                f"模拟在第 {step} 步发散（含 burn-in {burn_in} 步），|x| 超过 {OVERFLOW_GUARD:g}",
                step=step,
                seed=noise.seed,
            )
        buffer[:, idx] = x

    logger.debug(f"CGP模拟完成: N={N}, M={M}, K={K}, burn_in={burn_in}, sigma={noise.sigma}")
    return TimeSeries(buffer[:, M + burn_in:])


if __name__ == "__main__":
    # 简单自检：单节点自环的几何衰减
    A_demo = AdjacencyMatrix(np.array([[0.5]]))
    series = simulate(A_demo, PolyCoefficients.trivial(1), K=5, burn_in=0,
                      noise=NoiseSpec(sigma=0.0), initial_history=np.array([[2.0]]))
    print(f"🐱 几何衰减: {series.values.ravel().tolist()}")
