"""
多种子基准测试

每个种子：生成 CGP-SBM 实例 → 在训练窗口上扫描 λ₁ → 对每条选择规则选 λ₁ 并在全序列上重新拟合
→ 与真值比较。汇总给出每条规则的中位数与四分位距（IQR）。
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from Core.errors import BenchmarkError, CgpError, ConfigError
from Selection.lambda_select import LambdaGrid, SelectionRule, select_lambda, sweep
from Selection.pipeline import default_grid, refit
from Simulation.sbm_sim import SbmParams, generate_instance
from Solver.options import SolverOptions
from Tools.IO.core.config import config as io_config
from .recovery import recovery_report

logger = logging.getLogger("cgp.benchmark")

REPORT_COLUMNS = ("nbde", "nbde_pct", "true_positive_pct", "false_positive_pct", "adjacency_mse")


@dataclass(frozen=True)
class BenchmarkEnv:
    """实验环境 (N, Nc, M, K)"""

    n_nodes: int
    n_clusters: int
    n_lags: int
    n_samples: int

    def label(self) -> str:
        return f"({self.n_nodes}, {self.n_clusters}, {self.n_lags}, {self.n_samples})"


@dataclass(frozen=True)
class BenchmarkResult:
    env: BenchmarkEnv
    fit_lags: int
    per_seed: pd.DataFrame
    summary: pd.DataFrame
    failures: pd.DataFrame

    def median(self, rule: str, metric: str) -> float:
        row = self.summary[(self.summary["rule"] == rule) & (self.summary["metric"] == metric)]
        if row.empty:
            return float("nan")
        return float(row["median"].iloc[0])


def _run_seed(seed: int,
              params: SbmParams,
              env: BenchmarkEnv,
              fit_lags: int,
              rules: Sequence[SelectionRule],
              opts: SolverOptions,
              grid: Optional[LambdaGrid],
              holdout: float,
              grid_points: int,
              grid_min_ratio: float) -> List[dict]:
    instance = generate_instance(params.with_seed(seed), env.n_lags, env.n_samples)
    X = instance.X
    seed_grid = grid if grid is not None else default_grid(X, fit_lags, holdout, grid_points, grid_min_ratio)
    curve = sweep(X, fit_lags, seed_grid, opts, holdout=holdout, max_workers=1)
    true_edges = instance.A_true.edge_count

    rows = []
    for rule in rules:
        record = {"seed": seed, "rule": rule.mode.value, "true_edges": true_edges, "density": instance.density}
        try:
            report = select_lambda(curve, rule, true_edge_count=true_edges)
            lambda_refit, fit = refit(X, fit_lags, opts, curve, report.lambda1)
            record.update(lambda1=report.lambda1, lambda_refit=lambda_refit, error=None,
                          **recovery_report(instance.A_true, fit.A).as_dict())
        except CgpError as e:
            logger.warning(f"seed={seed} 规则 {rule.mode.value} 失败: {e.category}: {e.message}")
            record.update(error=f"{e.category}: {e.message}")
        rows.append(record)
    return rows


def _summarize(frame: pd.DataFrame) -> pd.DataFrame:
    records = []
    ok = frame[frame["error"].isna()] if not frame.empty else frame
    for rule, group in ok.groupby("rule", sort=False):
        for metric in REPORT_COLUMNS + ("lambda1",):
            values = group[metric].to_numpy(dtype=np.float64)
            q1, median, q3 = np.percentile(values, [25, 50, 75])
            records.append({"rule": rule, "metric": metric, "median": median, "q1": q1, "q3": q3,
                            "iqr": q3 - q1, "n": len(values)})
    return pd.DataFrame.from_records(records, columns=["rule", "metric", "median", "q1", "q3", "iqr", "n"])


def run_benchmark(env: BenchmarkEnv,
                  n_seeds: int,
                  sbm: SbmParams,
                  opts: SolverOptions,
                  rules: Sequence[SelectionRule] = (SelectionRule(),),
                  fit_lags: Optional[int] = None,
                  first_seed: int = 0,
                  grid: Optional[LambdaGrid] = None,
                  holdout: float = 0.2,
                  grid_points: int = 30,
                  grid_min_ratio: float = 0.01,
                  max_workers: Optional[int] = None,
                  progress: bool = False) -> BenchmarkResult:
    """
    在 n_seeds 个实例上运行完整流水线

    Args:
        env: (N, Nc, M, K)；M 为模拟用的滞后阶数
        n_seeds: 种子数（种子为 first_seed .. first_seed + n_seeds - 1）
        sbm: SBM 参数模板（n_nodes/n_clusters 须与 env 一致，seed 会被替换）
        opts: 求解器参数
        rules: 需要比较的选择规则（共享同一次扫描）
        fit_lags: 拟合用的滞后阶数，None 表示与模拟相同
        first_seed: 起始种子
        grid: 固定的 λ₁ 网格，None 时每个实例用自己的 λ_max 对数网格
        holdout: 留出比例
        grid_points, grid_min_ratio: 默认对数网格参数
        max_workers: 并发种子数上限
        progress: 是否显示进度条

    Returns:
        BenchmarkResult
    """
    if n_seeds < 1:
        raise ConfigError(f"种子数必须 ≥ 1，实际: {n_seeds}")
    if not rules:
        raise ConfigError("至少需要一条选择规则")
    if sbm.n_nodes != env.n_nodes or sbm.n_clusters != env.n_clusters:
        raise ConfigError(f"SBM 参数 (N={sbm.n_nodes}, Nc={sbm.n_clusters}) 与环境 {env.label()} 不一致")
    fit_lags = fit_lags or env.n_lags
    seeds = list(range(first_seed, first_seed + n_seeds))
    workers = min(io_config.get_max_workers(max_workers), n_seeds)
    logger.info(f"基准测试开始: 环境 {env.label()}, 拟合滞后 {fit_lags}, {n_seeds} 个种子, 并发 {workers}")

    def _task(seed: int):
        try:
            return seed, _run_seed(seed, sbm, env, fit_lags, rules, opts, grid, holdout, grid_points, grid_min_ratio), None
        except CgpError as e:
            logger.warning(f"seed={seed} 实例失败: {e.category}: {e.message}")
            return seed, [], f"{e.category}: {e.message}"

    if workers == 1:
        outcomes = [_task(seed) for seed in tqdm(seeds, desc="benchmark", disable=not progress)]
    else:
        outcomes = Parallel(n_jobs=workers, prefer="threads")(
            delayed(_task)(seed) for seed in tqdm(seeds, desc="benchmark", disable=not progress))
    outcomes.sort(key=lambda item: item[0])

    rows, failures = [], []
    for seed, seed_rows, error in outcomes:
        if error is not None:
            failures.append({"seed": seed, "rule": None, "error": error})
            continue
        rows.extend(seed_rows)
        failures.extend({"seed": seed, "rule": r["rule"], "error": r["error"]} for r in seed_rows if r["error"])

    per_seed = pd.DataFrame.from_records(rows)
    failed_seeds = {seed for seed, seed_rows, error in outcomes
                    if error is not None or all(r["error"] for r in seed_rows)}
    if len(failed_seeds) * 2 >= n_seeds:
        raise BenchmarkError(f"{len(failed_seeds)}/{n_seeds} 个种子失败，无法汇总: {sorted(failed_seeds)}")

    summary = _summarize(per_seed)
    logger.info(f"基准测试完成: 成功 {n_seeds - len(failed_seeds)}/{n_seeds}")
    return BenchmarkResult(env=env, fit_lags=fit_lags, per_seed=per_seed, summary=summary,
                           failures=pd.DataFrame.from_records(failures, columns=["seed", "rule", "error"]))
