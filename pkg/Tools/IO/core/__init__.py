"""
IO工具核心模块

提供统一的配置与写出工具函数
"""

from .config import IOConfig, config
from .utils import IOUtils, utils

__all__ = ["config", "utils", "IOConfig", "IOUtils"]
