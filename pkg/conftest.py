"""
pytest 全局配置

项目根目录加入 sys.path，使 Core、Solver 等顶层包可直接导入；
标记为 slow 的验收测试只在 CGP_RUN_SLOW=1 时运行。
"""

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 耗时较长的统计验收测试（CGP_RUN_SLOW=1 时运行）")


def pytest_collection_modifyitems(config, items):
    if os.getenv("CGP_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="设置 CGP_RUN_SLOW=1 以运行慢速验收测试")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
