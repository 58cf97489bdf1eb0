"""
🐱 CGP 结构学习命令行

子命令：simulate / fit / select / benchmark / rolling / profile
退出码：0 成功，1 运行失败，2 用法或配置错误，3 λ 选择失败。
失败时向 stderr 输出一行 `error category=<类别> message=<信息>`。

用法：python -m Cli.main <子命令> --help
"""

import logging
import os
import sys
from typing import Dict, List, Optional, Sequence

import click
import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from Config.CgpConfigManager import cgp_config
from Config.experiment import ExperimentConfig, GridSpec, build_experiment_config
from Core.cgp_model import TimeSeries
from Core.errors import CgpError, ConfigError, SelectionFailureError
from Evaluation.benchmark import BenchmarkEnv, run_benchmark
from Evaluation.recovery import recovery_report
from Evaluation.timing import timing_profile
from Selection.lambda_select import LambdaGrid, SelectionRule, curve_plot_frame
from Selection.pipeline import default_grid, select_and_fit
from Simulation.sbm_sim import generate_instance, sbm_params_from_density
from Solver.ccd_solver import fit_cgp
from Tools.Finance.rolling import rolling_analysis
from Tools.IO.core import config as io_config
from Tools.IO.core import utils
from Tools.IO.Read.load_csv import load_adjacency, load_csv
from Tools.IO.Write.serialize import serialize_results, write_frame
from ._setup import setup_logging

logger = logging.getLogger("cgp.cli")

app = typer.Typer(add_completion=False, help="因果图过程（CGP）结构学习工具")
console = Console()

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_SELECTION = 3


# ---------------------------------------------------------------------------
# 公共辅助函数
# ---------------------------------------------------------------------------

def _prepare(out_dir: Optional[str]) -> str:
    out_dir = out_dir or io_config.OUTPUT_DIR
    io_level = cgp_config.get_section("io")
    setup_logging(
        log_dir=os.path.join(out_dir, "_logs"),
        level=logging.getLevelName(str(io_level.get("log_level", "INFO")).upper()),
        max_bytes=int(io_level.get("log_max_bytes", 5 * 1024 * 1024)),
        backup_count=int(io_level.get("log_backup_count", 3)),
    )
    return out_dir


def _table_format(fmt: Optional[str]) -> str:
    return fmt or str(cgp_config.get_section("io").get("format", "csv"))


def _solver_values(lambda1: Optional[float] = None, max_iterations: Optional[int] = None,
                   epsilon: Optional[float] = None) -> Dict:
    values = cgp_config.get_solver_config()
    for key, value in (("lambda1", lambda1), ("max_iterations", max_iterations), ("epsilon", epsilon)):
        if value is not None:
            values[key] = value
    return values


def _grid_values(kind: Optional[str], points: Optional[int], min_ratio: Optional[float],
                 start: Optional[float], stop: Optional[float], step: Optional[float],
                 lambdas: Optional[str]) -> Dict:
    values = cgp_config.get_selection_config().get("grid", {})
    for key, value in (("kind", kind), ("n_points", points), ("min_ratio", min_ratio),
                       ("start", start), ("stop", stop), ("step", step)):
        if value is not None:
            values[key] = value
    if lambdas:
        try:
            values["values"] = [float(v) for v in lambdas.split(",") if v.strip()]
        except ValueError as e:
            raise ConfigError(f"--lambdas 必须是逗号分隔的数值列表: {lambdas!r}") from e
    return values


def _sbm_values(n: int, clusters: int, density: Optional[float], sigma: Optional[float], seed: int) -> Dict:
    sbm_cfg = cgp_config.get_sbm_config()
    default_density = sbm_cfg.pop("density", 0.02)
    density = density if density is not None else default_density
    ratio = sbm_cfg.pop("ratio", 5.0)
    if sigma is not None:
        sbm_cfg["noise_sigma"] = sigma
    params = sbm_params_from_density(n, clusters, density=density, ratio=ratio, seed=seed, **sbm_cfg)
    return params.model_dump()


def _resolve_grid(grid_spec: GridSpec, X: TimeSeries, M: int, holdout: float) -> LambdaGrid:
    fixed = grid_spec.fixed_grid()
    if fixed is not None:
        return fixed
    return default_grid(X, M, holdout, grid_spec.n_points, grid_spec.min_ratio)


def _metadata(exp: ExperimentConfig) -> Dict:
    payload = exp.model_dump(mode="json", exclude={"output_dir"})
    return {"seed": exp.seed, "config_hash": utils.config_hash(payload), "config": payload}


def _load_input(path: str, transform: str) -> TimeSeries:
    return load_csv(path, transform)


def _echo_paths(paths: Sequence[str]) -> None:
    for path in paths:
        typer.echo(f"wrote {path}")


def _frame_table(title: str, frame) -> Table:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for _, row in frame.iterrows():
        table.add_row(*["" if v is None or (isinstance(v, float) and v != v) else
                        (f"{v:.6g}" if isinstance(v, float) else str(v)) for v in row.tolist()])
    return table


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

@app.command()
def simulate(
    n: int = typer.Option(..., "--n", help="节点数 N"),
    clusters: int = typer.Option(1, "--clusters", help="簇数 Nc"),
    lags: int = typer.Option(1, "--lags", help="滞后阶数 M"),
    k: int = typer.Option(..., "--k", help="样本数 K（不含 burn-in）"),
    seed: int = typer.Option(..., "--seed", help="随机种子（必填）"),
    density: Optional[float] = typer.Option(None, "--density", help="目标边密度"),
    sigma: Optional[float] = typer.Option(None, "--sigma", help="噪声标准差"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("instance", "--prefix"),
):
    """生成 CGP-SBM 真值实例并写出序列、A_true、C_true"""
    out = _prepare(out)
    exp = build_experiment_config({
        "mode": "simulate", "n_lags": lags, "output_dir": out, "seed": seed,
        "sbm": _sbm_values(n, clusters, density, sigma, seed),
    })
    burn_in = int(cgp_config.get_section("simulation").get("burn_in", 500))
    instance = generate_instance(exp.sbm, lags, k, burn_in=burn_in)
    _echo_paths(serialize_results(instance, out, prefix, _metadata(exp)))
    typer.echo(f"edges={instance.A_true.edge_count} density={instance.density:.6g}")


@app.command()
def fit(
    input_path: str = typer.Option(..., "--input", help="时间序列 CSV"),
    lags: int = typer.Option(1, "--lags", help="滞后阶数 M"),
    lambda1: float = typer.Option(..., "--lambda1", help="LASSO 权重 λ₁"),
    transform: str = typer.Option("none", "--transform", help="none / log_return"),
    truth: Optional[str] = typer.Option(None, "--truth", help="真值邻接矩阵（三元组 CSV），用于恢复质量报告"),
    max_iterations: Optional[int] = typer.Option(None, "--max-iterations"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("fit", "--prefix"),
):
    """在给定 λ₁ 下运行完整块坐标下降"""
    out = _prepare(out)
    exp = build_experiment_config({
        "mode": "fit", "n_lags": lags, "input_path": input_path, "truth_path": truth, "output_dir": out,
        "transform": transform,
        "solver": _solver_values(lambda1, max_iterations, epsilon),
    })
    X = _load_input(input_path, exp.transform)
    result = fit_cgp(X, lags, exp.solver)
    meta = _metadata(exp)
    paths = serialize_results(result, out, prefix, meta)
    if truth:
        report = recovery_report(load_adjacency(truth), result.A)
        paths += serialize_results(report, out, prefix, meta)
        console.print(_frame_table("recovery", pd.DataFrame([report.as_dict()])))
    _echo_paths(paths)
    typer.echo(f"lambda1={result.lambda1:.6g} edges={result.A.edge_count} "
               f"sweeps={result.n_sweeps} stop_reason={result.stop_reason.value}")


@app.command()
def select(
    input_path: str = typer.Option(..., "--input", help="时间序列 CSV"),
    lags: int = typer.Option(1, "--lags", help="滞后阶数 M"),
    rule: Optional[str] = typer.Option(None, "--rule", help="err_pair / err_pair_plus_bic / bic / aic / mse_in / mse_out / oracle"),
    grid_kind: Optional[str] = typer.Option(None, "--grid", help="log / linear"),
    grid_points: Optional[int] = typer.Option(None, "--grid-points"),
    grid_min_ratio: Optional[float] = typer.Option(None, "--grid-min-ratio"),
    grid_start: Optional[float] = typer.Option(None, "--grid-start"),
    grid_stop: Optional[float] = typer.Option(None, "--grid-stop"),
    grid_step: Optional[float] = typer.Option(None, "--grid-step"),
    lambdas: Optional[str] = typer.Option(None, "--lambdas", help="显式 λ₁ 列表，逗号分隔"),
    holdout: Optional[float] = typer.Option(None, "--holdout", help="末尾留出比例"),
    transform: str = typer.Option("none", "--transform", help="none / log_return"),
    truth: Optional[str] = typer.Option(None, "--truth", help="真值邻接矩阵（三元组 CSV）"),
    emit_plot_data: bool = typer.Option(False, "--emit-plot-data", help="写出缩放到 [0,1] 的指标曲线"),
    fmt: Optional[str] = typer.Option(None, "--format", help="表格输出格式 csv / json（默认取 io.format）"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("select", "--prefix"),
):
    """扫描 λ₁ 网格、自动选择并在全序列上重新拟合"""
    out = _prepare(out)
    selection_cfg = cgp_config.get_selection_config()
    exp = build_experiment_config({
        "mode": "select", "n_lags": lags, "input_path": input_path, "truth_path": truth, "output_dir": out,
        "transform": transform,
        "solver": _solver_values(),
        "grid": _grid_values(grid_kind, grid_points, grid_min_ratio, grid_start, grid_stop, grid_step, lambdas),
        "rule": rule or selection_cfg.get("rule", "err_pair"),
        "holdout": holdout if holdout is not None else selection_cfg.get("holdout", 0.2),
        "fmt": _table_format(fmt),
    })
    X = _load_input(input_path, exp.transform)
    A_true = load_adjacency(truth) if truth else None
    true_edges = A_true.edge_count if A_true is not None else None

    outcome = select_and_fit(
        X, lags, exp.solver,
        grid=_resolve_grid(exp.grid, X, lags, exp.holdout),
        rule=SelectionRule.parse(exp.rule),
        holdout=exp.holdout,
        true_edge_count=true_edges,
        out_of_sample_err=bool(selection_cfg.get("out_of_sample_err", False)),
        max_workers=cgp_config.get_performance_config().get("max_workers"),
    )
    meta = {**_metadata(exp), "selected_lambda1": outcome.report.lambda1, "lambda_refit": outcome.lambda_refit,
            "candidates": outcome.report.candidates}
    paths = serialize_results(outcome.curve, out, prefix, meta, fmt=exp.fmt)
    paths += serialize_results(outcome.fit, out, prefix, meta)
    if A_true is not None:
        paths += serialize_results(recovery_report(A_true, outcome.fit.A), out, prefix, meta, fmt=exp.fmt)
    if emit_plot_data:
        plot_path = os.path.join(out, f"{prefix}_plot_data.csv")
        paths.append(write_frame(curve_plot_frame(outcome.curve, true_edges), plot_path, meta, kind="plot_data"))
    _echo_paths(paths)
    typer.echo(f"{outcome.report.describe()} lambda_refit={outcome.lambda_refit:.6g} "
               f"edges={outcome.fit.A.edge_count}")


@app.command()
def benchmark(
    n: int = typer.Option(..., "--n", help="节点数 N"),
    clusters: int = typer.Option(1, "--clusters", help="簇数 Nc"),
    lags: int = typer.Option(1, "--lags", help="模拟用滞后阶数 M"),
    k: int = typer.Option(..., "--k", help="样本数 K"),
    seed: int = typer.Option(..., "--seed", help="起始随机种子（必填）"),
    samples: int = typer.Option(10, "--samples", help="种子数"),
    fit_lags: Optional[int] = typer.Option(None, "--fit-lags", help="拟合用滞后阶数（默认与模拟相同）"),
    rules: Optional[List[str]] = typer.Option(None, "--rule", help="可重复指定多条规则"),
    density: Optional[float] = typer.Option(None, "--density"),
    sigma: Optional[float] = typer.Option(None, "--sigma"),
    grid_kind: Optional[str] = typer.Option(None, "--grid"),
    grid_points: Optional[int] = typer.Option(None, "--grid-points"),
    grid_min_ratio: Optional[float] = typer.Option(None, "--grid-min-ratio"),
    grid_start: Optional[float] = typer.Option(None, "--grid-start"),
    grid_stop: Optional[float] = typer.Option(None, "--grid-stop"),
    grid_step: Optional[float] = typer.Option(None, "--grid-step"),
    lambdas: Optional[str] = typer.Option(None, "--lambdas"),
    holdout: Optional[float] = typer.Option(None, "--holdout"),
    fmt: Optional[str] = typer.Option(None, "--format"),
    progress: bool = typer.Option(False, "--progress", help="显示进度条"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("benchmark", "--prefix"),
):
    """多种子基准测试：中位数与四分位距"""
    out = _prepare(out)
    selection_cfg = cgp_config.get_selection_config()
    rule_names = list(rules) if rules else [selection_cfg.get("rule", "err_pair")]
    exp = build_experiment_config({
        "mode": "benchmark", "n_lags": lags, "output_dir": out, "seed": seed,
        "sbm": _sbm_values(n, clusters, density, sigma, seed),
        "solver": _solver_values(),
        "grid": _grid_values(grid_kind, grid_points, grid_min_ratio, grid_start, grid_stop, grid_step, lambdas),
        "rule": ",".join(rule_names),
        "holdout": holdout if holdout is not None else selection_cfg.get("holdout", 0.2),
        "fmt": _table_format(fmt),
    })
    result = run_benchmark(
        BenchmarkEnv(n, clusters, lags, k), samples, exp.sbm, exp.solver,
        rules=[SelectionRule.parse(name) for name in rule_names],
        fit_lags=fit_lags,
        first_seed=seed,
        grid=exp.grid.fixed_grid(),
        holdout=exp.holdout,
        grid_points=exp.grid.n_points,
        grid_min_ratio=exp.grid.min_ratio,
        max_workers=cgp_config.get_performance_config().get("max_workers"),
        progress=progress,
    )
    meta = {**_metadata(exp), "env": [n, clusters, lags, k], "fit_lags": result.fit_lags, "n_seeds": samples,
            "dispersion": "iqr"}
    paths = serialize_results(result.per_seed, out, f"{prefix}_per_seed", meta, fmt=exp.fmt)
    paths += serialize_results(result.summary, out, f"{prefix}_summary", meta, fmt=exp.fmt)
    paths += serialize_results(result.failures, out, f"{prefix}_failures", meta, fmt=exp.fmt)
    console.print(_frame_table(f"benchmark {result.env.label()} fit M={result.fit_lags} (median / IQR)",
                               result.summary))
    _echo_paths(paths)


@app.command()
def rolling(
    input_path: str = typer.Option(..., "--input", help="价格或收益 CSV"),
    lags: int = typer.Option(5, "--lags", help="滞后阶数 M"),
    transform: Optional[str] = typer.Option(None, "--transform", help="none / log_return"),
    window: Optional[int] = typer.Option(None, "--window", help="窗口长度（样本数）"),
    step: Optional[int] = typer.Option(None, "--step", help="窗口步长（样本数）"),
    rv_decay: Optional[float] = typer.Option(None, "--rv-decay"),
    rv_window: Optional[int] = typer.Option(None, "--rv-window"),
    rule: Optional[str] = typer.Option(None, "--rule"),
    grid_kind: Optional[str] = typer.Option(None, "--grid"),
    grid_points: Optional[int] = typer.Option(None, "--grid-points"),
    grid_min_ratio: Optional[float] = typer.Option(None, "--grid-min-ratio"),
    lambdas: Optional[str] = typer.Option(None, "--lambdas"),
    holdout: Optional[float] = typer.Option(None, "--holdout"),
    fmt: Optional[str] = typer.Option(None, "--format"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("rolling", "--prefix"),
):
    """滚动窗口稀疏度与市场 log(RV) 跟踪"""
    out = _prepare(out)
    selection_cfg = cgp_config.get_selection_config()
    price_values = cgp_config.get_price_config()
    for key, value in (("transform", transform), ("window", window), ("step", step),
                       ("rv_decay", rv_decay), ("rv_window", rv_window)):
        if value is not None:
            price_values[key] = value
    exp = build_experiment_config({
        "mode": "rolling", "n_lags": lags, "input_path": input_path, "output_dir": out,
        "solver": _solver_values(),
        "grid": _grid_values(grid_kind, grid_points, grid_min_ratio, None, None, None, lambdas),
        "rule": rule or selection_cfg.get("rule", "err_pair"),
        "holdout": holdout if holdout is not None else selection_cfg.get("holdout", 0.2),
        "price": price_values,
        "fmt": _table_format(fmt),
    })
    X = _load_input(input_path, exp.price.transform)
    table = rolling_analysis(X, exp.price, exp.solver, lags, grid=exp.grid.fixed_grid(),
                             rule=SelectionRule.parse(exp.rule), holdout=exp.holdout,
                             max_workers=cgp_config.get_performance_config().get("max_workers"))
    paths = serialize_results(table, out, prefix, _metadata(exp), fmt=exp.fmt)
    console.print(_frame_table("rolling", table.drop(columns=["error"])))
    _echo_paths(paths)


@app.command()
def profile(
    axis: str = typer.Option("n", "--axis", help="n（节点数）或 k（样本数）"),
    sizes: str = typer.Option(..., "--sizes", help="逗号分隔的规模，如 100,200"),
    n: int = typer.Option(100, "--n", help="axis=k 时固定的节点数"),
    clusters: int = typer.Option(5, "--clusters"),
    lags: int = typer.Option(3, "--lags"),
    k: int = typer.Option(1040, "--k", help="axis=n 时固定的样本数"),
    repeats: int = typer.Option(1, "--repeats"),
    seed: int = typer.Option(0, "--seed"),
    out: Optional[str] = typer.Option(None, "--out", help="输出目录"),
    prefix: str = typer.Option("profile", "--prefix"),
):
    """compute_R 运行时间随 N 或 K 的变化"""
    out = _prepare(out)
    try:
        size_list = [int(v) for v in sizes.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"--sizes 必须是逗号分隔的整数列表: {sizes!r}") from e
    exp = build_experiment_config({"mode": "profile", "n_lags": lags, "output_dir": out, "seed": seed,
                                   "solver": _solver_values()})
    density = cgp_config.get_sbm_config().get("density", 0.02)
    result = timing_profile(size_list, axis=axis, n_nodes=n, n_clusters=clusters, n_lags=lags, n_samples=k,
                            density=density, opts=exp.solver, repeats=repeats, seed=seed)
    paths = serialize_results(result.table, out, prefix, {**_metadata(exp), "axis": axis, "slope": result.slope})
    console.print(_frame_table(f"profile axis={axis}", result.table))
    _echo_paths(paths)
    typer.echo(f"slope={result.slope:.4g}")


# ---------------------------------------------------------------------------
# 入口
# ---------------------------------------------------------------------------

def _report_error(category: str, message: str) -> None:
    single_line = " ".join(str(message).split())
    typer.echo(f"error category={category} message={single_line}", err=True)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    运行命令行并返回退出码（不调用 sys.exit）

    Args:
        argv: 参数列表，None 时取 sys.argv[1:]

    Returns:
        退出码
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(app)
    try:
        command.main(args=argv, prog_name="cgp", standalone_mode=False)
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.exceptions.UsageError as e:
        _report_error("usage_error", e.format_message())
        return EXIT_USAGE
    except click.exceptions.Abort:
        _report_error("aborted", "用户中断")
        return EXIT_RUNTIME
    except SelectionFailureError as e:
        _report_error(e.category, e.message)
        return EXIT_SELECTION
    except ConfigError as e:
        _report_error(e.category, e.message)
        return EXIT_USAGE
    except CgpError as e:
        logger.error(f"命令失败: {e.category}: {e.message}")
        _report_error(e.category, e.message)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception("未预期的错误")
        _report_error("internal_error", f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
