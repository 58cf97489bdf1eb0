"""
λ₁ 网格扫描与自动选择

核心功能：
- LambdaGrid：对数网格（以 λ_max 为锚）或等步长网格
- sweep：对每个 λ₁ 运行 compute_R，记录 err / err^d / AIC / BIC / MSE 等指标
- find_peak：三点平滑后的内部全局最大值
- select_lambda：err 对取峰值均值，可加入 BIC 最小值；另有按单一指标取最小值与 oracle 模式
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from Core.cgp_model import AdjacencyMatrix, LagCoefficients, TimeSeries
from Core.errors import CgpError, ConfigError, SelectionFailureError
from Solver.ccd_solver import compute_R, in_sample_mse
from Solver.gram_cache import build_gram_cache
from Solver.options import SolverOptions
from Tools.IO.core.config import config as io_config
from .metrics import UNDEFINED, err_degree_metric, err_metric, information_criteria, mse_out

logger = logging.getLogger("cgp.select")

METRIC_COLUMNS = ("err", "err_d", "aic", "bic", "mse_in", "mse_out", "err_out", "err_d_out")


@dataclass(frozen=True)
class LambdaGrid:
    """严格递增的非负 λ₁ 序列"""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError("λ 网格不能为空")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ConfigError("λ 网格必须由有限的非负实数组成")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("λ 网格必须严格递增")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def make_grid(kind: str = "log",
              *,
              lam_max: Optional[float] = None,
              n_points: int = 30,
              min_ratio: float = 0.01,
              start: float = 30.0,
              stop: float = 300.0,
              step: float = 5.0) -> LambdaGrid:
    """
    构造 λ₁ 网格

    Args:
        kind: 'log'（min_ratio·λ_max 到 λ_max 的 n_points 个对数等距点）或 'linear'（start..stop，步长 step）
        lam_max: 对数网格的上端点
        n_points: 对数网格点数
        min_ratio: 对数网格下端点与 λ_max 之比
        start, stop, step: 等步长网格参数（含 stop）

    Returns:
        LambdaGrid
    """
    if kind == "log":
        if lam_max is None or not lam_max > 0:
            raise ConfigError(f"对数网格需要正的 λ_max，实际: {lam_max}")
        if n_points < 1 or not 0 < min_ratio < 1:
            raise ConfigError(f"对数网格参数无效: n_points={n_points}, min_ratio={min_ratio}")
        if n_points == 1:
            return LambdaGrid((float(lam_max),))
        return LambdaGrid(tuple(np.geomspace(min_ratio * lam_max, lam_max, n_points)))
    if kind == "linear":
        if step <= 0 or stop < start or start < 0:
            raise ConfigError(f"等步长网格参数无效: start={start}, stop={stop}, step={step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return LambdaGrid(tuple(start + step * i for i in range(count)))
    raise ConfigError(f"未知的网格类型: {kind}（可选 log / linear）")


class RuleMode(str, Enum):
    ERR_PAIR = "err_pair"
    ERR_PAIR_PLUS_BIC = "err_pair_plus_bic"
    BIC = "bic"
    AIC = "aic"
    MSE_IN = "mse_in"
    MSE_OUT = "mse_out"
    ORACLE = "oracle"


@dataclass(frozen=True)
class SelectionRule:
    mode: RuleMode = RuleMode.ERR_PAIR

    @classmethod
    def parse(cls, name: str) -> "SelectionRule":
        try:
            return cls(RuleMode(name))
        except ValueError as e:
            options = ", ".join(m.value for m in RuleMode)
            raise ConfigError(f"未知的选择规则: {name}（可选 {options}）") from e


@dataclass(frozen=True)
class CurveRow:
    """单个 λ₁ 的拟合与指标；失败的行 error 非空且指标为 NaN"""

    lambda1: float
    edge_count: Optional[int] = None
    err: float = UNDEFINED
    err_d: float = UNDEFINED
    aic: float = UNDEFINED
    bic: float = UNDEFINED
    mse_in: float = UNDEFINED
    mse_out: float = UNDEFINED
    err_out: float = UNDEFINED
    err_d_out: float = UNDEFINED
    n_sweeps: Optional[int] = None
    stop_reason: Optional[str] = None
    error: Optional[str] = None
    A: Optional[AdjacencyMatrix] = field(default=None, repr=False, compare=False)
    R: Optional[LagCoefficients] = field(default=None, repr=False, compare=False)

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class SelectionCurve:
    """按 λ₁ 升序排列的扫描结果"""

    rows: Tuple[CurveRow, ...]
    n_lags: int
    n_train: int
    n_samples: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: r.lambda1)))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([row.lambda1 for row in self.rows])

    def values(self, metric: str) -> np.ndarray:
        """某一指标列（未定义为 NaN）"""
        if metric == "edge_count":
            return np.array([np.nan if r.edge_count is None else float(r.edge_count) for r in self.rows])
        if metric not in METRIC_COLUMNS:
            raise ConfigError(f"未知的指标: {metric}")
        return np.array([getattr(row, metric) for row in self.rows], dtype=np.float64)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            records.append({
                "lambda1": row.lambda1,
                "edge_count": row.edge_count,
                **{name: getattr(row, name) for name in METRIC_COLUMNS},
                "n_sweeps": row.n_sweeps,
                "stop_reason": row.stop_reason,
                "error": row.error,
            })
        frame = pd.DataFrame.from_records(records)
        frame["edge_count"] = frame["edge_count"].astype("Int64")
        frame["n_sweeps"] = frame["n_sweeps"].astype("Int64")
        return frame


def split_holdout(X: TimeSeries, M: int, holdout: float) -> Tuple[TimeSeries, Optional[TimeSeries]]:
    """
    把序列切成训练窗口与末尾连续的留出窗口

    Args:
        X: 完整序列
        M: 滞后阶数
        holdout: 留出比例 [0, 1)

    Returns:
        (train, test)；留出窗口不足 M+1 个样本或训练窗口过短时 test 为 None
    """
    if not 0 <= holdout < 1:
        raise ConfigError(f"留出比例必须在 [0, 1) 内，实际: {holdout}")
    K = X.n_samples
    n_test = int(round(K * holdout))
    if n_test == 0:
        return X, None
    n_train = K - n_test
    if n_test <= M or n_train <= M:
        logger.warning(f"留出窗口过短（K={K}, holdout={holdout}, M={M}），不计算样本外指标")
        return X, None
    return X.window(0, n_train), X.window(n_train, K)


def _fit_row(train: TimeSeries,
             test: Optional[TimeSeries],
             M: int,
             opts: SolverOptions,
             lambda1: float,
             cache,
             out_of_sample_err: bool) -> CurveRow:
    try:
        stage = compute_R(train, M, opts.with_lambda(lambda1), cache)
        A, R = stage.A, stage.R
        aic, bic = information_criteria(train, R, A, M)
        row = dict(
            lambda1=lambda1,
            edge_count=A.edge_count,
            err=err_metric(train, A, M),
            err_d=err_degree_metric(train, A, M),
            aic=aic,
            bic=bic,
            mse_in=in_sample_mse(train, R, M),
            n_sweeps=stage.n_sweeps,
            stop_reason=stage.stop_reason.value,
            A=A,
            R=R,
        )
        if test is not None:
            row["mse_out"] = mse_out(train, test, R, M)
            if out_of_sample_err:
                row["err_out"] = err_metric(test, A, M)
                row["err_d_out"] = err_degree_metric(test, A, M)
        return CurveRow(**row)
    except CgpError as e:
        logger.warning(f"λ₁={lambda1:g} 拟合失败，记为未定义行: {e.category}: {e.message}")
        return CurveRow(lambda1=lambda1, error=f"{e.category}: {e.message}")


def sweep(X: TimeSeries,
          M: int,
          grid: LambdaGrid,
          opts: SolverOptions,
          holdout: float = 0.2,
          out_of_sample_err: bool = False,
          max_workers: Optional[int] = None,
          progress: bool = False) -> SelectionCurve:
    """
    在 λ₁ 网格上逐点拟合并计算选择指标

    Args:
        X: 时间序列
        M: 滞后阶数
        grid: λ₁ 网格
        opts: 求解器参数（lambda1 会被网格值替换）
        holdout: 末尾留作样本外评估的比例
        out_of_sample_err: 是否额外在留出窗口上计算 err / err^d
        max_workers: 并发上限（默认读取 CGP_MAX_WORKERS）
        progress: 是否显示进度条

    Returns:
        SelectionCurve
    """
    train, test = split_holdout(X, M, holdout)
    # 同一训练窗口上的所有 λ 共享只读 Gram 缓存
    cache = build_gram_cache(train, M, opts.ridge_lambda2)
    workers = io_config.get_max_workers(max_workers)
    logger.info(f"开始 λ 扫描: {len(grid)} 个点, N={X.n_nodes}, K_train={train.n_samples}, M={M}, 并发={workers}")

    def _run(lambda1: float) -> CurveRow:
        return _fit_row(train, test, M, opts, lambda1, cache, out_of_sample_err)

    if workers == 1 or len(grid) == 1:
        rows = [_run(lam) for lam in tqdm(grid.values, desc="λ sweep", disable=not progress)]
    else:
        # numpy 运算释放 GIL，线程后端即可并行；结果顺序与网格一致
        rows = Parallel(n_jobs=workers, prefer="threads")(
            delayed(_run)(lam) for lam in tqdm(grid.values, desc="λ sweep", disable=not progress))

    failed = sum(1 for row in rows if row.failed)
    if failed:
        logger.warning(f"λ 扫描中有 {failed}/{len(rows)} 个点失败")
    return SelectionCurve(rows=tuple(rows), n_lags=M, n_train=train.n_samples, n_samples=X.n_samples)


def _moving_average(values: np.ndarray) -> np.ndarray:
    """三点滑动平均，两端只用两个点"""
    padded = np.convolve(values, np.ones(3), mode="same")
    counts = np.convolve(np.ones_like(values), np.ones(3), mode="same")
    return padded / counts


def find_peak(lambdas: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """
    平滑曲线的内部全局最大值

    Args:
        lambdas: λ₁ 取值
        values: 对应指标（NaN 视为未定义，先剔除）

    Returns:
        峰值所在的 λ₁；最大值落在首/末个已定义点或已定义点少于 3 个时返回 None
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    defined = np.isfinite(values)
    if int(defined.sum()) < 3:
        return None
    xs, ys = lambdas[defined], values[defined]
    smoothed = _moving_average(ys)
    index = int(np.argmax(smoothed))
    if index == 0 or index == len(ys) - 1:
        return None
    return float(xs[index])


def _argmin_lambda(curve: SelectionCurve, metric: str) -> Optional[float]:
    values = curve.values(metric)
    defined = np.isfinite(values)
    if not defined.any():
        return None
    masked = np.where(defined, values, np.inf)
    return float(curve.lambdas[int(np.argmin(masked))])


@dataclass(frozen=True)
class SelectionReport:
    """选中的 λ₁ 及其来源"""

    lambda1: float
    rule: RuleMode
    candidates: Dict[str, Optional[float]]

    def describe(self) -> str:
        parts = ", ".join(f"{k}={'-' if v is None else f'{v:g}'}" for k, v in self.candidates.items())
        return f"rule={self.rule.value} λ₁={self.lambda1:g} ({parts})"


def select_lambda(curve: SelectionCurve,
                  rule: SelectionRule = SelectionRule(),
                  true_edge_count: Optional[int] = None) -> SelectionReport:
    """
    按规则从扫描曲线中选出 λ₁

    Args:
        curve: 扫描结果
        rule: 选择规则
        true_edge_count: oracle 模式所需的真实边数

    Returns:
        SelectionReport
    """
    if len(curve) == 0:
        raise SelectionFailureError("扫描曲线为空")
    lambdas = curve.lambdas
    mode = rule.mode
    candidates: Dict[str, Optional[float]] = {}

    if mode in (RuleMode.ERR_PAIR, RuleMode.ERR_PAIR_PLUS_BIC):
        candidates["err_peak"] = find_peak(lambdas, curve.values("err"))
        candidates["err_d_peak"] = find_peak(lambdas, curve.values("err_d"))
        if mode is RuleMode.ERR_PAIR_PLUS_BIC:
            candidates["bic_min"] = _argmin_lambda(curve, "bic")
    elif mode is RuleMode.ORACLE:
        if true_edge_count is None:
            raise ConfigError("oracle 规则需要真实邻接矩阵的边数")
        counts = curve.values("edge_count")
        defined = np.isfinite(counts)
        if defined.any():
            gaps = np.where(defined, np.abs(counts - true_edge_count), np.inf)
            candidates["oracle"] = float(lambdas[int(np.argmin(gaps))])
        else:
            candidates["oracle"] = None
    else:
        candidates[f"{mode.value}_min"] = _argmin_lambda(curve, mode.value)

    available = [v for v in candidates.values() if v is not None]
    if not available:
        raise SelectionFailureError(
            f"规则 {mode.value} 在网格 [{lambdas[0]:g}, {lambdas[-1]:g}] 上没有可用的峰值/最小值，请扩大 λ 网格"
        )
    report = SelectionReport(lambda1=float(np.mean(available)), rule=mode, candidates=candidates)
    logger.info(f"λ 选择完成: {report.describe()}")
    return report


def _min_max(values: np.ndarray) -> np.ndarray:
    defined = np.isfinite(values)
    out = np.full_like(values, np.nan)
    if not defined.any():
        return out
    low, high = values[defined].min(), values[defined].max()
    out[defined] = 0.0 if high == low else (values[defined] - low) / (high - low)
    return out


def curve_plot_frame(curve: SelectionCurve, true_edge_count: Optional[int] = None) -> pd.DataFrame:
    """
    指标对比图的数据：每条指标曲线按 min-max 缩放到 [0, 1]

    Args:
        curve: 扫描结果
        true_edge_count: 已知真实边数时附加 |边数差| 列（同样缩放）

    Returns:
        以 lambda1 为首列的 DataFrame
    """
    columns: Dict[str, np.ndarray] = {"lambda1": curve.lambdas}
    for metric in ("err", "err_d", "aic", "bic", "mse_in", "mse_out"):
        columns[metric] = _min_max(curve.values(metric))
    if true_edge_count is not None:
        gaps = np.abs(curve.values("edge_count") - true_edge_count)
        columns["edge_count_diff"] = gaps
        columns["edge_count_diff_scaled"] = _min_max(gaps)
    return pd.DataFrame(columns)
