"""
通用工具函数模块

提供结果写出的通用功能：原子写入、配置指纹、目录准备
"""

import hashlib
import os
import tempfile
from typing import Any, Callable, Dict, Mapping, Optional

import orjson

from Core.errors import SerializationError


class IOUtils:
    """IO通用工具类"""

    def ensure_directory_exists(self, dir_path: str) -> None:
        """
        确保目录存在

        Args:
            dir_path: 目录路径
        """
        if not dir_path:
            return
        try:
            os.makedirs(dir_path, exist_ok=True)
        except OSError as e:
            raise SerializationError(f"创建目录失败: {e}", path=dir_path) from e

    def atomic_write(self, path: str, writer: Callable[[str], None]) -> str:
        """
        先写临时文件再 os.replace，避免留下半截文件

        Args:
            path: 目标文件路径
            writer: 接收临时文件路径并完成写入的回调

        Returns:
            目标文件路径
        """
        directory = os.path.dirname(os.path.abspath(path))
        self.ensure_directory_exists(directory)
        fd, tmp_path = tempfile.mkstemp(prefix=".tmp_", dir=directory)
        os.close(fd)
        try:
            writer(tmp_path)
            os.replace(tmp_path, path)
        except SerializationError:
            self._discard(tmp_path)
            raise
        except Exception as e:
            self._discard(tmp_path)
            raise SerializationError(f"写入文件失败: {e}", path=path) from e
        return path

    def atomic_write_text(self, path: str, content: str) -> str:
        def _write(tmp_path: str) -> None:
            with open(tmp_path, "w", encoding="utf-8", newline="") as f:
                f.write(content)

        return self.atomic_write(path, _write)

    @staticmethod
    def sidecar_path(path: str) -> str:
        """结果文件对应的元数据文件路径"""
        return f"{path}.meta.json"

    def write_sidecar(self, path: str, metadata: Mapping[str, Any]) -> str:
        """写出 JSON 元数据（UTF-8，缩进 2）"""
        content = orjson.dumps(dict(metadata), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS
                               | orjson.OPT_SERIALIZE_NUMPY, default=str)
        return self.atomic_write_text(self.sidecar_path(path), content.decode("utf-8") + "\n")

    def read_sidecar(self, path: str) -> Optional[Dict[str, Any]]:
        """读取元数据，文件不存在时返回 None"""
        meta_path = self.sidecar_path(path)
        if not os.path.exists(meta_path):
            return None
        try:
            with open(meta_path, "rb") as f:
                return orjson.loads(f.read())
        except (OSError, orjson.JSONDecodeError) as e:
            raise SerializationError(f"读取元数据失败: {e}", path=meta_path) from e

    def config_hash(self, payload: Mapping[str, Any]) -> str:
        """对配置字典做键排序后的 sha256 指纹"""
        encoded = orjson.dumps(dict(payload), option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY, default=str)
        return hashlib.sha256(encoded).hexdigest()

    @staticmethod
    def _discard(tmp_path: str) -> None:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)


utils = IOUtils()
