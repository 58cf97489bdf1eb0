"""金融数据工具：已实现方差与滚动窗口稀疏度分析"""

from .realized_variance import RealizedVariance, ewma_weights, realized_variance
from .rolling import PriceOptions, build_price_options, rolling_analysis

__all__ = [
    "PriceOptions",
    "RealizedVariance",
    "build_price_options",
    "ewma_weights",
    "realized_variance",
    "rolling_analysis",
]
