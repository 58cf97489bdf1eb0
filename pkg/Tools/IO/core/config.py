"""
统一配置管理模块

提供输入输出相关的路径与并发配置，环境变量优先：
- PROJECT_ROOT: 项目根目录
- CGP_OUTPUT_DIR: 结果输出目录（默认 项目根目录/Output）
- CGP_MAX_WORKERS: 扫描与基准测试的最大并发数
"""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# 加载项目根目录下的 .env 文件
project_root = Path(__file__).parent.parent.parent.parent
load_dotenv(project_root / ".env")

logger = logging.getLogger("cgp.io")


class IOConfig:
    """IO工具统一配置类"""

    def __init__(self):
        self._project_root = None
        self._output_dir = None

    @property
    def PROJECT_ROOT(self) -> str:
        """项目根目录"""
        if self._project_root is None:
            self._project_root = self._get_project_root()
        return self._project_root

    @property
    def OUTPUT_DIR(self) -> str:
        """默认输出目录"""
        if self._output_dir is None:
            self._output_dir = os.getenv("CGP_OUTPUT_DIR") or str(Path(self.PROJECT_ROOT) / "Output")
        return self._output_dir

    def _get_project_root(self) -> str:
        project_root = os.getenv("PROJECT_ROOT")
        if project_root:
            return str(project_root)
        # Tools/IO/core/config.py -> 项目根目录
        return str(Path(__file__).parent.parent.parent.parent)

    def get_max_workers(self, override: Optional[int] = None) -> int:
        """
        解析并发上限

        Args:
            override: 显式指定的并发数（优先级最高）

        Returns:
            ≥ 1 的整数
        """
        if override is not None:
            return max(1, int(override))
        raw = os.getenv("CGP_MAX_WORKERS")
        if raw:
            try:
                return max(1, int(raw))
            except ValueError:
                logger.warning("CGP_MAX_WORKERS=%r 不是整数，改用默认并发数", raw)
        return max(1, min(4, os.cpu_count() or 1))


# 创建全局配置实例
config = IOConfig()
