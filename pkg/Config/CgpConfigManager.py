"""
🐱 CGP配置管理器

核心功能：
- 读取 Config/cgp_config.yaml 的 cgp 段
- 文件缺失或损坏时回退到内置默认配置
- 缺失的键按段与默认配置合并
- 支持配置重载
"""

import copy
import os
from typing import Any, Dict, Optional
import logging

import yaml

logger = logging.getLogger("cgp.config")

SECTIONS = ("solver", "selection", "sbm", "simulation", "price", "io", "performance")


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """递归合并字典，override 优先"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class CgpConfigManager:
    """CGP配置管理器（单例）"""

    _instance = None
    _config = None
    _config_path = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(CgpConfigManager, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if self._config is None:
            self._config = self._load_config()

    def _get_config_path(self) -> str:
        """配置文件路径，可用环境变量 CGP_CONFIG 覆盖"""
        if self._config_path:
            return self._config_path
        env_path = os.getenv("CGP_CONFIG")
        if env_path:
            return env_path
        current_dir = os.path.dirname(os.path.abspath(__file__))
        return os.path.join(current_dir, "cgp_config.yaml")

    def _load_config(self) -> Dict[str, Any]:
        """加载配置"""
        config_path = self._get_config_path()
        defaults = self._get_default_config()

        try:
            if os.path.exists(config_path):
                with open(config_path, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
                section = loaded.get("cgp", {})
                if not isinstance(section, dict):
                    logger.warning(f"配置文件的 cgp 段不是映射，使用默认配置: {config_path}")
                    return defaults
                logger.info(f"CGP配置加载成功: {config_path}")
                return _merge(defaults, section)
            logger.warning(f"CGP配置文件不存在: {config_path}")
            return defaults
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"加载CGP配置失败: {e}")
            return defaults

    def _get_default_config(self) -> Dict[str, Any]:
        """获取默认配置"""
        return {
            "solver": {
                "lambda1_c": 0.05,
                "lambda2_c": 1e3,
                "max_iterations": 50,
                "epsilon": 0.1,
                "tolerance": "relative",
                "relative_epsilon": 1e-4,
                "min_sweeps": 5,
                "ridge_lambda2": "auto",
            },
            "selection": {
                "rule": "err_pair",
                "holdout": 0.2,
                "out_of_sample_err": False,
                "grid": {"kind": "log", "n_points": 30, "min_ratio": 0.01, "start": 30.0, "stop": 300.0, "step": 5.0},
            },
            "sbm": {
                "density": 0.02,
                "ratio": 5.0,
                "weight_low": 0.3,
                "weight_high": 0.7,
                "sign_prob": 0.5,
                "spectral_target": 0.5,
                "decay": 0.5,
                "noise_sigma": 1.0,
            },
            "simulation": {"burn_in": 500},
            "price": {"transform": "log_return", "window": 1040, "step": 126, "rv_decay": 0.99, "rv_window": 40},
            "io": {"format": "csv", "log_level": "INFO", "log_max_bytes": 5 * 1024 * 1024, "log_backup_count": 3},
            "performance": {"max_workers": None},
        }

    def get_section(self, name: str) -> Dict[str, Any]:
        """获取某一段配置的副本"""
        if name not in SECTIONS:
            raise KeyError(f"未知的配置段: {name}")
        return copy.deepcopy(self._config.get(name, {}))

    def get_solver_config(self) -> Dict[str, Any]:
        return self.get_section("solver")

    def get_selection_config(self) -> Dict[str, Any]:
        return self.get_section("selection")

    def get_sbm_config(self) -> Dict[str, Any]:
        return self.get_section("sbm")

    def get_price_config(self) -> Dict[str, Any]:
        return self.get_section("price")

    def get_performance_config(self) -> Dict[str, Any]:
        return self.get_section("performance")

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def reload(self, config_path: Optional[str] = None) -> bool:
        """重新加载配置，可指定新的配置文件"""
        try:
            if config_path is not None:
                self._config_path = config_path
            self._config = self._load_config()
            logger.info("CGP配置重新加载成功")
            return True
        except Exception as e:
            logger.error(f"CGP配置重新加载失败: {e}")
            return False


# 全局配置管理器实例
cgp_config = CgpConfigManager()
