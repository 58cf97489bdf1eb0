"""
compute_R 运行时间剖析：沿节点数 N 或样本数 K 扩展规模，拟合对数-对数斜率
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from Core.errors import ConfigError
from Simulation.sbm_sim import generate_instance, sbm_params_from_density
from Solver.ccd_solver import compute_R, lambda_max
from Solver.options import SolverOptions

logger = logging.getLogger("cgp.timing")


@dataclass(frozen=True)
class TimingProfile:
    axis: str
    table: pd.DataFrame
    slope: float


def timing_profile(sizes: Sequence[int],
                   axis: str = "n",
                   n_nodes: int = 100,
                   n_clusters: int = 5,
                   n_lags: int = 3,
                   n_samples: int = 1040,
                   density: float = 0.02,
                   lambda_fraction: float = 0.1,
                   opts: SolverOptions = SolverOptions(),
                   repeats: int = 1,
                   seed: int = 0) -> TimingProfile:
    """
    测量不同规模下 compute_R 的耗时（含 Gram 缓存构建）

    Args:
        sizes: 规模序列（axis='n' 时为节点数，'k' 时为样本数）
        axis: 'n' 或 'k'
        n_nodes, n_clusters, n_lags, n_samples: 固定的其余环境参数
        density: SBM 目标密度
        lambda_fraction: 拟合使用的 λ₁ = lambda_fraction·λ_max
        opts: 求解器参数
        repeats: 每个规模重复次数，取最短时间
        seed: 实例种子

    Returns:
        TimingProfile；只有一个规模时斜率为 NaN
    """
    if axis not in ("n", "k"):
        raise ConfigError(f"axis 只能是 'n' 或 'k'，实际: {axis}")
    if not sizes or repeats < 1:
        raise ConfigError("至少需要一个规模且 repeats ≥ 1")

    records = []
    for size in sizes:
        N = int(size) if axis == "n" else n_nodes
        K = int(size) if axis == "k" else n_samples
        params = sbm_params_from_density(N, min(n_clusters, N), density=density, seed=seed)
        X = generate_instance(params, n_lags, K).X
        fit_opts = opts.with_lambda(lambda_fraction * lambda_max(X, n_lags))

        elapsed = math.inf
        sweeps = 0
        for _ in range(repeats):
            start = time.perf_counter()
            stage = compute_R(X, n_lags, fit_opts)
            elapsed = min(elapsed, time.perf_counter() - start)
            sweeps = stage.n_sweeps
        logger.info(f"计时: N={N}, K={K}, 用时 {elapsed:.4f}s, 轮数 {sweeps}")
        records.append({"size": int(size), "n_nodes": N, "n_samples": K, "seconds": elapsed, "n_sweeps": sweeps})

    table = pd.DataFrame.from_records(records)
    table["ratio"] = table["seconds"] / table["seconds"].shift(1)
    if len(table) >= 2:
        slope = float(np.polyfit(np.log(table["size"]), np.log(table["seconds"]), 1)[0])
    else:
        slope = float("nan")
    return TimingProfile(axis=axis, table=table, slope=slope)
