"""
CSV 数据读取工具

- load_csv: 首行为节点标签、每行一个时间步的数值表 → N×K TimeSeries（可选对数收益变换）
- load_series: 读取 simulate 写出的序列文件及其元数据
- load_adjacency: 读取三元组 (row, col, weight) 格式的邻接矩阵

缺失值一律拒绝，不做插补；所有格式错误都带行列坐标（行号按文件行计，表头为第 1 行）。
"""

import logging
import os
import re
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from Core.cgp_model import AdjacencyMatrix, TimeSeries
from Core.errors import DataFormatError, SerializationError
from Tools.IO.core import utils

logger = logging.getLogger("cgp.io")

TRANSFORMS = ("none", "log_return")
ADJACENCY_COLUMNS = ["row", "col", "weight"]


def _read_raw(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise SerializationError(f"文件不存在: {path}", path=path)
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"CSV 文件为空: {path}") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise DataFormatError(f"CSV 行长度不一致（第 {line} 行）: {e}", row=line) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SerializationError(f"读取文件失败: {e}", path=path) from e


def _to_numeric(raw: pd.DataFrame) -> np.ndarray:
    """逐列转为 float64，第一个非法单元格报告其坐标"""
    values = np.empty(raw.shape, dtype=np.float64)
    for c, column in enumerate(raw.columns):
        cells = raw[column].fillna("").str.strip()
        try:
            # object → float64 逐个走 float()，保证 17 位有效数字往返一致
            numeric = cells.to_numpy(dtype=object).astype(np.float64)
        except (TypeError, ValueError):
            numeric = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(numeric)
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            cell = cells.iloc[r]
            reason = "缺失值" if cell == "" else f"非数值单元格 {cell!r}"
            raise DataFormatError(f"第 {r + 2} 行, 列 {column!r}: {reason}", row=r + 2, column=str(column))
        values[:, c] = numeric
    return values


def load_csv(path: str, transform: str = "none") -> TimeSeries:
    """
    读取行 = 时间、列 = 节点的 CSV

    Args:
        path: 文件路径
        transform: 'none' 或 'log_return'（x_i(k) = ln(p_i(k)/p_i(k-1))，K 减 1）

    Returns:
        N×K TimeSeries，标签取自表头
    """
    if transform not in TRANSFORMS:
        raise DataFormatError(f"未知的变换: {transform}（可选 {', '.join(TRANSFORMS)}）")
    raw = _read_raw(path)
    if raw.shape[0] == 0 or raw.shape[1] == 0:
        raise DataFormatError(f"CSV 没有数据行: {path}")
    values = _to_numeric(raw)
    labels = tuple(str(c) for c in raw.columns)

    if transform == "log_return":
        bad = np.argwhere(values <= 0)
        if bad.size:
            r, c = bad[0]
            raise DataFormatError(f"第 {r + 2} 行, 列 {labels[c]!r}: 对数收益要求价格为正，实际 {values[r, c]}",
                                  row=int(r) + 2, column=labels[c])
        if values.shape[0] < 2:
            raise DataFormatError("对数收益至少需要两行价格")
        values = np.diff(np.log(values), axis=0)

    logger.info(f"读取 CSV: {path}, 节点数={values.shape[1]}, 样本数={values.shape[0]}, 变换={transform}")
    return TimeSeries(values.T, labels)


def load_series(path: str) -> Tuple[TimeSeries, Dict[str, Any]]:
    """读取序列文件，返回 (TimeSeries, 元数据)；没有元数据文件时元数据为空字典"""
    series = load_csv(path)
    return series, utils.read_sidecar(path) or {}


def load_adjacency(path: str, n_nodes: Optional[int] = None) -> AdjacencyMatrix:
    """
    读取三元组格式的邻接矩阵

    Args:
        path: 三元组 CSV（表头 row,col,weight）
        n_nodes: 节点数；None 时取元数据中的 n_nodes，再不行则按最大索引推断

    Returns:
        AdjacencyMatrix（与写出时逐位一致）
    """
    if not os.path.exists(path):
        raise SerializationError(f"文件不存在: {path}", path=path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"邻接矩阵文件格式错误: {e}") from e
    if list(frame.columns) != ADJACENCY_COLUMNS:
        raise DataFormatError(f"邻接矩阵表头应为 {ADJACENCY_COLUMNS}，实际 {list(frame.columns)}", row=1)

    if n_nodes is None:
        metadata = utils.read_sidecar(path) or {}
        n_nodes = metadata.get("n_nodes")
    if n_nodes is None:
        if frame.empty:
            raise DataFormatError(f"空邻接矩阵缺少元数据，无法确定节点数: {path}")
        n_nodes = int(max(frame["row"].max(), frame["col"].max())) + 1
        logger.warning(f"邻接矩阵缺少元数据，按最大索引推断 N={n_nodes}")

    weights = np.zeros((int(n_nodes), int(n_nodes)))
    if not frame.empty:
        try:
            rows = frame["row"].to_numpy(dtype=np.int64)
            cols = frame["col"].to_numpy(dtype=np.int64)
            vals = frame["weight"].to_numpy(dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise DataFormatError(f"邻接矩阵包含非数值单元格: {e}") from e
        out_of_range = (rows < 0) | (rows >= n_nodes) | (cols < 0) | (cols >= n_nodes)
        if out_of_range.any():
            r = int(np.flatnonzero(out_of_range)[0])
            raise DataFormatError(f"第 {r + 2} 行: 索引 ({rows[r]}, {cols[r]}) 超出 N={n_nodes}", row=r + 2)
        weights[rows, cols] = vals
    return AdjacencyMatrix(weights)
