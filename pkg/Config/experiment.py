"""
实验配置模型

命令行参数与 cgp_config.yaml 合并后在这里统一校验，校验通过才开始计算。
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from Core.errors import ConfigError
from Selection.lambda_select import LambdaGrid, make_grid
from Simulation.sbm_sim import SbmParams
from Solver.options import SolverOptions
from Tools.Finance.rolling import PriceOptions

Mode = Literal["simulate", "fit", "select", "benchmark", "rolling", "profile"]


class GridSpec(BaseModel):
    """λ₁ 网格描述：显式取值、对数网格或等步长网格"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["log", "linear"] = "log"
    n_points: int = Field(default=30, ge=1)
    min_ratio: float = Field(default=0.01, gt=0.0, lt=1.0)
    start: float = Field(default=30.0, ge=0.0)
    stop: float = Field(default=300.0, ge=0.0)
    step: float = Field(default=5.0, gt=0.0)
    values: Optional[List[float]] = None

    def fixed_grid(self) -> Optional[LambdaGrid]:
        """不依赖数据的网格（显式取值或等步长）；对数网格返回 None"""
        if self.values:
            return LambdaGrid(tuple(sorted(set(self.values))))
        if self.kind == "linear":
            return make_grid("linear", start=self.start, stop=self.stop, step=self.step)
        return None


class ExperimentConfig(BaseModel):
    """一次命令行调用的完整配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Mode
    n_lags: int = Field(default=1, ge=1)
    input_path: Optional[str] = None
    truth_path: Optional[str] = None
    transform: Literal["none", "log_return"] = "none"
    output_dir: str
    seed: Optional[int] = Field(default=None, ge=0)
    sbm: Optional[SbmParams] = None
    solver: SolverOptions = SolverOptions()
    grid: GridSpec = GridSpec()
    rule: str = "err_pair"
    holdout: float = Field(default=0.2, ge=0.0, lt=1.0)
    price: Optional[PriceOptions] = None
    fmt: Literal["csv", "json"] = "csv"

    @model_validator(mode="after")
    def _check_mode_fields(self) -> "ExperimentConfig":
        if self.mode in ("simulate", "benchmark"):
            if self.seed is None:
                raise ValueError(f"{self.mode} 模式必须指定 --seed")
            if self.sbm is None:
                raise ValueError(f"{self.mode} 模式缺少 SBM 参数")
        if self.mode in ("fit", "select", "rolling") and not self.input_path:
            raise ValueError(f"{self.mode} 模式必须指定输入文件")
        if self.mode == "rolling" and self.price is None:
            raise ValueError("rolling 模式缺少价格/窗口参数")
        return self


def build_experiment_config(values: dict) -> ExperimentConfig:
    """校验实验配置，失败时转换为 ConfigError"""
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"实验配置校验失败: {e}") from e
