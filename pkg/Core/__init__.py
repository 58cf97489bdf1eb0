# 🐱 Core模块包 - __init__.py
"""
CGP核心模块包

- 领域类型（时间序列、滞后系数、邻接矩阵、多项式系数）
- CGP 前向模型：图滤波、预测、噪声驱动模拟
- 统一异常
"""

__version__ = "1.0.0"

from .errors import (
    CgpError,
    DimensionError,
    OutOfRangeError,
    InsufficientDataError,
    NonFiniteInputError,
    InstabilityError,
    SamplingError,
    SelectionFailureError,
    BenchmarkError,
    DataFormatError,
    SerializationError,
    ConfigError,
)
from .cgp_model import (
    TimeSeries,
    LagCoefficients,
    AdjacencyMatrix,
    PolyCoefficients,
    NoiseSpec,
    graph_filter,
    cgp_lag_matrices,
    predict,
    simulate,
)
