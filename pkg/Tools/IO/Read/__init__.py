"""
CSV 读取工具模块
"""

from .load_csv import load_adjacency, load_csv, load_series

__all__ = ["load_csv", "load_series", "load_adjacency"]
