"""
日志配置模块

文件日志用 RotatingFileHandler 自动切分；终端只显示 WARNING 及以上（写到 stderr），
保证 stdout 上的结果输出可被脚本解析。
"""

import logging
from logging.handlers import RotatingFileHandler
import pathlib
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler


def setup_logging(
    log_dir: Optional[Union[str, pathlib.Path]] = None,
    log_name: str = "cgp.log",
    level: int = logging.INFO,
    max_bytes: int = 5 * 1024 * 1024,   # 5 MB
    backup_count: int = 3,
    encoding: str = "utf-8",
    console_level: int = logging.WARNING,
) -> pathlib.Path:
    """
    初始化日志系统

    参数：
        log_dir       : 日志所在目录，默认与此文件同目录
        log_name      : 日志文件名
        level         : 文件日志级别
        max_bytes     : 单文件最大字节数
        backup_count  : 备份文件数量
        encoding      : 文件编码
        console_level : stderr 日志级别

    返回：
        日志文件路径
    """
    if log_dir is None:
        log_dir = pathlib.Path(__file__).parent
    else:
        log_dir = pathlib.Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    log_file = log_dir / log_name

    handler = RotatingFileHandler(
        filename=str(log_file),
        mode="a",
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding=encoding,
    )
    handler.setFormatter(logging.Formatter(
        fmt="%(asctime)s %(levelname)s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    ))
    handler.setLevel(level)

    console = RichHandler(console=Console(stderr=True), level=console_level, show_path=False)

    logger = logging.getLogger()
    logger.setLevel(min(level, console_level))
    logger.handlers.clear()          # 清除已有 handler，避免重复
    logger.addHandler(handler)
    logger.addHandler(console)
    return log_file
