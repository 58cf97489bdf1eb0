"""
结果序列化工具

文件布局（保持稳定）：
- 时间序列：表头为节点标签，每行一个时间步
- 邻接矩阵 / 滞后系数：三元组 CSV（row,col,weight / lag,row,col,weight），只写非零项
- 多项式系数：l,j,value
- 曲线与表格：带表头 CSV，未定义值写为空字符串

浮点数统一按 %.17g 写出，读回逐位一致。每个文件旁写一个 <文件>.meta.json 元数据，
其中 created_at 是唯一随时间变化的字段。
"""

import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import orjson
import pandas as pd

from Core import __version__
from Core.cgp_model import AdjacencyMatrix, LagCoefficients, PolyCoefficients, TimeSeries
from Core.errors import SerializationError
from Evaluation.recovery import RecoveryReport
from Selection.lambda_select import SelectionCurve
from Simulation.sbm_sim import CgpInstance
from Solver.ccd_solver import FitResult
from Tools.IO.core import utils

logger = logging.getLogger("cgp.io")

FLOAT_FORMAT = "%.17g"
FORMATS = ("csv", "json")


def _metadata(kind: str, extra: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    meta: Dict[str, Any] = {"kind": kind, "version": __version__}
    meta.update(extra or {})
    meta["created_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def write_frame(frame: pd.DataFrame, path: str, metadata: Optional[Mapping[str, Any]] = None,
                kind: str = "table", fmt: str = "csv") -> str:
    """写出表格（csv 或 json records）及元数据"""
    if fmt not in FORMATS:
        raise SerializationError(f"未知的输出格式: {fmt}（可选 {', '.join(FORMATS)}）", path=path)

    if fmt == "csv":
        def _write(tmp_path: str) -> None:
            frame.to_csv(tmp_path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    else:
        def _write(tmp_path: str) -> None:
            records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
            with open(tmp_path, "wb") as f:
                f.write(orjson.dumps(records, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY, default=str))

    utils.atomic_write(path, _write)
    utils.write_sidecar(path, _metadata(kind, {"rows": int(len(frame)), "columns": list(map(str, frame.columns)),
                                               **(metadata or {})}))
    logger.debug(f"写出 {kind}: {path}")
    return path


def write_series(X: TimeSeries, path: str, metadata: Optional[Mapping[str, Any]] = None) -> str:
    frame = pd.DataFrame(X.values.T, columns=list(X.labels))
    return write_frame(frame, path, {"n_nodes": X.n_nodes, "n_samples": X.n_samples, **(metadata or {})},
                       kind="series")


def write_adjacency(A: AdjacencyMatrix, path: str, metadata: Optional[Mapping[str, Any]] = None) -> str:
    """非零项按行优先顺序写为 row,col,weight；空矩阵只有表头"""
    rows, cols = np.nonzero(A.weights)
    frame = pd.DataFrame({"row": rows.astype(np.int64), "col": cols.astype(np.int64),
                          "weight": A.weights[rows, cols]})
    return write_frame(frame, path, {"n_nodes": A.n_nodes, "edge_count": A.edge_count, **(metadata or {})},
                       kind="adjacency")


def write_lag_coefficients(R: LagCoefficients, path: str, metadata: Optional[Mapping[str, Any]] = None) -> str:
    stacked = R.stacked()
    lags, rows, cols = np.nonzero(stacked)
    frame = pd.DataFrame({"lag": lags.astype(np.int64) + 1, "row": rows.astype(np.int64),
                          "col": cols.astype(np.int64), "weight": stacked[lags, rows, cols]})
    return write_frame(frame, path, {"n_nodes": R.n_nodes, "n_lags": R.n_lags, **(metadata or {})},
                       kind="lag_coefficients")


def write_poly_coeffs(C: PolyCoefficients, path: str, metadata: Optional[Mapping[str, Any]] = None) -> str:
    records = [{"l": l, "j": j, "value": C[(l, j)]} for l in range(1, C.n_lags + 1) for j in range(l + 1)]
    return write_frame(pd.DataFrame.from_records(records, columns=["l", "j", "value"]), path,
                       {"n_lags": C.n_lags, **(metadata or {})}, kind="poly_coefficients")


def serialize_results(result: Any,
                      out_dir: str,
                      prefix: str = "result",
                      metadata: Optional[Mapping[str, Any]] = None,
                      fmt: str = "csv") -> List[str]:
    """
    按结果类型写出文件

    Args:
        result: FitResult / SelectionCurve / RecoveryReport / CgpInstance / DataFrame
        out_dir: 输出目录
        prefix: 文件名前缀
        metadata: 追加到每个元数据文件的信息（种子、配置指纹等）
        fmt: 表格类结果的格式 csv / json（矩阵始终为三元组 CSV）

    Returns:
        写出的文件路径列表
    """
    utils.ensure_directory_exists(out_dir)
    meta = dict(metadata or {})

    def _path(name: str, ext: str = "csv") -> str:
        return os.path.join(out_dir, f"{prefix}_{name}.{ext}")

    table_ext = "json" if fmt == "json" else "csv"

    if isinstance(result, FitResult):
        fit_meta = {**meta, "lambda1": result.lambda1, "stop_reason": result.stop_reason.value,
                    "n_sweeps": result.n_sweeps, "objective_trace": list(result.objective_trace),
                    "mse_trace": list(result.mse_trace),
                    "ridge": {str(k): v for k, v in result.diagnostics.ridge.items()},
                    "dead_columns": list(result.diagnostics.dead_columns)}
        return [
            write_adjacency(result.A, _path("adjacency"), fit_meta),
            write_lag_coefficients(result.R, _path("lags"), fit_meta),
            write_poly_coeffs(result.C, _path("poly"), fit_meta),
        ]
    if isinstance(result, CgpInstance):
        inst_meta = {**meta, **result.metadata()}
        return [
            write_series(result.X, _path("series"), inst_meta),
            write_adjacency(result.A_true, _path("adjacency_true"), inst_meta),
            write_poly_coeffs(result.C_true, _path("poly_true"), inst_meta),
        ]
    if isinstance(result, SelectionCurve):
        curve_meta = {**meta, "n_lags": result.n_lags, "n_train": result.n_train, "n_samples": result.n_samples}
        return [write_frame(result.to_frame(), _path("curve", table_ext), curve_meta, kind="selection_curve", fmt=fmt)]
    if isinstance(result, RecoveryReport):
        return [write_frame(pd.DataFrame([result.as_dict()]), _path("recovery", table_ext), meta,
                            kind="recovery_report", fmt=fmt)]
    if isinstance(result, TimeSeries):
        return [write_series(result, _path("series"), meta)]
    if isinstance(result, pd.DataFrame):
        return [write_frame(result, _path("table", table_ext), meta, fmt=fmt)]
    raise SerializationError(f"不支持序列化的结果类型: {type(result).__name__}", path=out_dir)
