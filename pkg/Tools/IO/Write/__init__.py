"""
结果写出工具模块
"""

from .serialize import (
    serialize_results,
    write_adjacency,
    write_frame,
    write_lag_coefficients,
    write_poly_coeffs,
    write_series,
)

__all__ = [
    "serialize_results",
    "write_adjacency",
    "write_frame",
    "write_lag_coefficients",
    "write_poly_coeffs",
    "write_series",
]
