"""
统一异常模块

所有库代码抛出的异常都继承自 CgpError，并带有一个机器可解析的 category，
CLI 据此输出单行错误信息并选择退出码。
"""

from typing import Optional


class CgpError(Exception):
    """CGP工具包异常基类"""

    category = "runtime_failure"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DimensionError(CgpError):
    """矩阵或序列维度不匹配"""

    category = "dimension_mismatch"


class OutOfRangeError(CgpError):
    """时间索引或滞后索引越界"""

    category = "out_of_range"


class InsufficientDataError(CgpError):
    """样本数不足以拟合给定滞后阶数"""

    category = "insufficient_data"


class NonFiniteInputError(CgpError):
    """输入中包含 NaN 或 Inf"""

    category = "non_finite_input"


class InstabilityError(CgpError):
    """模拟信号发散（超过溢出保护阈值）"""

    category = "instability"

    def __init__(self, message: str, step: int, seed: Optional[int] = None):
        super().__init__(message)
        self.step = step
        self.seed = seed


class SamplingError(CgpError):
    """随机图采样失败"""

    category = "sampling_failure"


class SelectionFailureError(CgpError):
    """所有启用的指标都没有可用的峰值/最小值"""

    category = "selection_failure"


class BenchmarkError(CgpError):
    """基准测试中失败的种子过多"""

    category = "benchmark_failure"


class DataFormatError(CgpError):
    """CSV 数据格式错误，带行列坐标"""

    category = "data_format"

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class SerializationError(CgpError):
    """结果读写失败，带路径上下文"""

    category = "io_failure"

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class ConfigError(CgpError):
    """配置或参数校验失败"""

    category = "invalid_config"
