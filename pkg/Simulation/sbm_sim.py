"""
CGP-SBM 真值实例生成

流程：
1. 按随机块模型采样有向带符号邻接矩阵（无自环），按谱半径缩放到 spectral_target
2. 采样多项式系数并整体缩放，满足 Σ_{l≥2} Σ_j |c_{l,j}|·ρʲ ≤ 0.9(1 − ρ)
3. 调用 simulate（默认 burn-in 500 步）生成时间序列

所有随机性来自 SbmParams.seed 派生的 SeedSequence，同一 seed 结果完全一致。
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from Core.cgp_model import AdjacencyMatrix, NoiseSpec, PolyCoefficients, TimeSeries, simulate
from Core.errors import ConfigError, InstabilityError, SamplingError

logger = logging.getLogger("cgp.sbm")

MAX_RESAMPLES = 10
BURN_IN = 500
# 谱半径低于此值视为幂零矩阵，不做缩放
NILPOTENT_TOLERANCE = 1e-12


class SbmParams(BaseModel):
    """随机块模型与 CGP 实例参数"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_nodes: int = Field(ge=1)
    n_clusters: int = Field(default=1, ge=1)
    p_in: float = Field(ge=0.0, le=1.0)
    p_out: float = Field(ge=0.0, le=1.0)
    weight_low: float = Field(default=0.3, ge=0.0)
    weight_high: float = Field(default=0.7, ge=0.0)
    sign_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    spectral_target: float = Field(default=0.5, gt=0.0, lt=1.0)
    decay: float = Field(default=0.5, gt=0.0, lt=1.0)
    noise_sigma: float = Field(default=1.0, ge=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> "SbmParams":
        if self.p_out > self.p_in:
            raise ValueError(f"p_out ({self.p_out}) 不能大于 p_in ({self.p_in})")
        if self.n_clusters > self.n_nodes:
            raise ValueError(f"簇数 {self.n_clusters} 不能超过节点数 {self.n_nodes}")
        if self.weight_low > self.weight_high:
            raise ValueError(f"权重下界 {self.weight_low} 大于上界 {self.weight_high}")
        return self

    def with_seed(self, seed: int) -> "SbmParams":
        return build_sbm_params({**self.model_dump(), "seed": int(seed)})


def build_sbm_params(values: dict) -> SbmParams:
    """校验参数，失败时转换为 ConfigError"""
    try:
        return SbmParams(**values)
    except ValidationError as e:
        raise ConfigError(f"SBM 参数校验失败: {e}") from e


def cluster_labels(n_nodes: int, n_clusters: int) -> np.ndarray:
    """把节点均匀切成 n_clusters 个连续块，返回每个节点的簇编号"""
    labels = np.empty(n_nodes, dtype=np.int64)
    for c, block in enumerate(np.array_split(np.arange(n_nodes), n_clusters)):
        labels[block] = c
    return labels


def _pair_counts(n_nodes: int, n_clusters: int) -> Tuple[int, int]:
    """(簇内有序对数, 簇间有序对数)，不含对角线"""
    sizes = np.bincount(cluster_labels(n_nodes, n_clusters), minlength=n_clusters)
    within = int(np.sum(sizes * (sizes - 1)))
    between = int(n_nodes ** 2 - np.sum(sizes ** 2))
    return within, between


def expected_density(params: SbmParams) -> float:
    """期望的非零边比例（相对 N²）"""
    within, between = _pair_counts(params.n_nodes, params.n_clusters)
    return (params.p_in * within + params.p_out * between) / float(params.n_nodes ** 2)


def sbm_params_from_density(n_nodes: int,
                            n_clusters: int,
                            density: float = 0.02,
                            ratio: float = 5.0,
                            **overrides) -> SbmParams:
    """
    由目标密度与簇内/簇间概率比反解 p_in、p_out

    Args:
        n_nodes: 节点数
        n_clusters: 簇数
        density: 目标非零边比例（相对 N²）
        ratio: p_in / p_out
        **overrides: 其余 SbmParams 字段

    Returns:
        SbmParams
    """
    if not 0 < density < 1 or ratio < 1:
        raise ConfigError(f"密度需在 (0, 1) 内且 ratio ≥ 1，实际: density={density}, ratio={ratio}")
    within, between = _pair_counts(n_nodes, n_clusters)
    target_edges = density * n_nodes ** 2
    denominator = ratio * within + between
    if denominator == 0:
        raise ConfigError(f"N={n_nodes} 时不存在非对角的节点对")
    p_out = target_edges / denominator
    p_in = ratio * p_out
    if p_in > 1.0:
        p_in = 1.0
        p_out = (target_edges - within) / between if between else 0.0
        p_out = min(max(p_out, 0.0), 1.0)
    if within == 0:
        p_in = max(p_in, p_out)
    return build_sbm_params({"n_nodes": n_nodes, "n_clusters": n_clusters, "p_in": p_in, "p_out": p_out, **overrides})


def spectral_radius(weights: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(weights)))) if weights.size else 0.0


def sample_adjacency(params: SbmParams, rng: Optional[np.random.Generator] = None) -> AdjacencyMatrix:
    """
    采样 SBM 有向邻接矩阵并缩放谱半径

    Args:
        params: SBM 参数
        rng: 随机数生成器，None 时由 params.seed 创建

    Returns:
        无自环、谱半径 = spectral_target（幂零时为 0）的 AdjacencyMatrix
    """
    rng = rng if rng is not None else np.random.default_rng(params.seed)
    N = params.n_nodes
    labels = cluster_labels(N, params.n_clusters)
    same = labels[:, np.newaxis] == labels[np.newaxis, :]
    prob = np.where(same, params.p_in, params.p_out)
    np.fill_diagonal(prob, 0.0)

    for attempt in range(1, MAX_RESAMPLES + 1):
        mask = rng.random((N, N)) < prob
        magnitude = rng.uniform(params.weight_low, params.weight_high, size=(N, N))
        sign = np.where(rng.random((N, N)) < params.sign_prob, -1.0, 1.0)
        weights = np.where(mask, magnitude * sign, 0.0)
        if np.any(weights):
            break
        logger.warning(f"第 {attempt} 次采样得到全零邻接矩阵 (seed={params.seed})，重新采样")
    else:
        raise SamplingError(f"连续 {MAX_RESAMPLES} 次采样得到全零邻接矩阵 (seed={params.seed})")

    rho = spectral_radius(weights)
    if rho > NILPOTENT_TOLERANCE:
        weights = weights * (params.spectral_target / rho)
    else:
        logger.info(f"采样矩阵幂零（谱半径 {rho:.2e}），不做缩放")
    return AdjacencyMatrix(weights)


def sample_poly_coeffs(M: int,
                       decay: float = 0.5,
                       seed: int = 0,
                       spectral_target: float = 0.5,
                       rng: Optional[np.random.Generator] = None) -> PolyCoefficients:
    """
    采样多项式系数

    c_{l,j} ~ U[-1, 1]·decay^{l-1}（l ≥ 2），再整体缩放使
    Σ |c_{l,j}|·spectral_targetʲ ≤ 0.9(1 − spectral_target)

    Args:
        M: 滞后阶数
        decay: 高阶滞后的衰减系数 (0, 1)
        seed: 随机种子（rng 为 None 时使用）
        spectral_target: 邻接矩阵的谱半径
        rng: 随机数生成器

    Returns:
        PolyCoefficients
    """
    if M < 1:
        raise ConfigError(f"滞后阶数必须 ≥ 1，实际: {M}")
    if not 0 < decay < 1:
        raise ConfigError(f"decay 必须在 (0, 1) 内，实际: {decay}")
    if not 0 < spectral_target < 1:
        raise ConfigError(f"spectral_target 必须在 (0, 1) 内，实际: {spectral_target}")
    if M == 1:
        return PolyCoefficients.trivial(1)

    rng = rng if rng is not None else np.random.default_rng(seed)
    indices = PolyCoefficients.free_indices_for(M)
    raw = rng.uniform(-1.0, 1.0, size=len(indices))
    raw *= np.array([decay ** (l - 1) for l, _ in indices])

    bound = float(np.sum(np.abs(raw) * np.array([spectral_target ** j for _, j in indices])))
    limit = 0.9 * (1.0 - spectral_target)
    if bound > limit:
        raw *= limit / bound
    return PolyCoefficients.from_free_vector(M, raw)


@dataclass(frozen=True)
class CgpInstance:
    """真值实例：A_true、C_true 与生成的时间序列"""

    A_true: AdjacencyMatrix
    C_true: PolyCoefficients
    X: TimeSeries
    params: SbmParams
    n_lags: int

    @property
    def density(self) -> float:
        return self.A_true.density

    def metadata(self) -> dict:
        return {
            "n_nodes": self.params.n_nodes,
            "n_lags": self.n_lags,
            "n_samples": self.X.n_samples,
            "density": self.density,
            "edge_count": self.A_true.edge_count,
            "spectral_radius": spectral_radius(self.A_true.weights),
            "sbm": self.params.model_dump(),
            "C_true": self.C_true.as_dict(),
        }


def generate_instance(params: SbmParams, M: int, K: int, burn_in: int = BURN_IN) -> CgpInstance:
    """
    生成一个 CGP-SBM 实例

    Args:
        params: SBM 参数（含 seed）
        M: 滞后阶数
        K: 保留的样本数
        burn_in: 预热步数

    Returns:
        CgpInstance
    """
    adjacency_seq, coeff_seq, noise_seq = np.random.SeedSequence(params.seed).spawn(3)
    A = sample_adjacency(params, np.random.default_rng(adjacency_seq))
    C = sample_poly_coeffs(M, params.decay, spectral_target=params.spectral_target,
                           rng=np.random.default_rng(coeff_seq))
    noise = NoiseSpec(sigma=params.noise_sigma, seed=int(noise_seq.generate_state(1)[0]))
    try:
        X = simulate(A, C, K, burn_in=burn_in, noise=noise)
    except InstabilityError as e:
        raise InstabilityError(f"实例发散 (seed={params.seed}): {e.message}", step=e.step, seed=params.seed) from e
    logger.info(f"生成 CGP-SBM 实例: N={params.n_nodes}, Nc={params.n_clusters}, M={M}, K={K}, "
                f"密度={A.density:.4f}, seed={params.seed}")
    return CgpInstance(A_true=A, C_true=C, X=X, params=params, n_lags=M)


if __name__ == "__main__":
    demo = sbm_params_from_density(100, 5, density=0.02, seed=7)
    instance = generate_instance(demo, M=3, K=1040)
    print(f"🐱 实例密度: {instance.density:.4f}, 边数: {instance.A_true.edge_count}")
