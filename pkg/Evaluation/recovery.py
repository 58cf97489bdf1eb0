"""
邻接矩阵恢复质量指标
"""

from dataclasses import asdict, dataclass

import numpy as np

from Core.cgp_model import AdjacencyMatrix
from Core.errors import DimensionError


@dataclass(frozen=True)
class RecoveryReport:
    """估计 Â 与真值 A 的比较结果（百分比均在 [0, 100]）"""

    nbde: int
    nbde_pct: float
    true_positive_pct: float
    false_positive_pct: float
    adjacency_mse: float
    true_positive: int
    false_positive: int
    edges_true: int
    edges_hat: int

    def as_dict(self) -> dict:
        return asdict(self)


def recovery_report(A_true: AdjacencyMatrix, A_hat: AdjacencyMatrix) -> RecoveryReport:
    """
    比较估计邻接矩阵与真值

    - nbde = |edges(Â) − edges(A)|，nbde_pct = nbde / N² × 100
    - 真阳性率 = |Â≠0 ∧ A≠0| / edges(A) × 100（edges(A) = 0 时记 0）
    - 假阳性率 = |Â≠0 ∧ A=0| / edges(Â) × 100（edges(Â) = 0 时记 0）
    - adjacency_mse = ‖Â − A‖_F² / N²

    Args:
        A_true: 真值邻接矩阵
        A_hat: 估计邻接矩阵

    Returns:
        RecoveryReport
    """
    if A_true.n_nodes != A_hat.n_nodes:
        raise DimensionError(f"邻接矩阵维度不一致: 真值 {A_true.n_nodes}, 估计 {A_hat.n_nodes}")
    n_pairs = float(A_true.n_nodes ** 2)
    truth, estimate = A_true.support(), A_hat.support()
    edges_true, edges_hat = int(truth.sum()), int(estimate.sum())
    tp = int(np.sum(estimate & truth))
    fp = int(np.sum(estimate & ~truth))
    nbde = abs(edges_hat - edges_true)
    diff = A_hat.weights - A_true.weights
    return RecoveryReport(
        nbde=nbde,
        nbde_pct=nbde / n_pairs * 100.0,
        true_positive_pct=tp / edges_true * 100.0 if edges_true else 0.0,
        false_positive_pct=fp / edges_hat * 100.0 if edges_hat else 0.0,
        adjacency_mse=float(np.sum(diff * diff)) / n_pairs,
        true_positive=tp,
        false_positive=fp,
        edges_true=edges_true,
        edges_hat=edges_hat,
    )
