"""
求解器参数模型

默认值：λ₁ᶜ = 0.05，λ₂ᶜ = 10³，最大迭代 50 次，收敛阈值 ε = 0.1。
R 阶段默认按相对变化判断收敛（relative_epsilon），MSE 两条判据在 min_sweeps 轮之后才生效；
tolerance = "absolute" 时参数与 MSE 变化都直接和 ε 比较。
"""

from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from Core.errors import ConfigError


class SolverOptions(BaseModel):
    """CCD 求解器参数"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda1: float = Field(default=0.0, ge=0.0, description="R_1 / A 列的 LASSO 权重")
    lambda1_c: float = Field(default=0.05, ge=0.0, description="多项式系数的 L1 权重")
    lambda2_c: float = Field(default=1e3, ge=0.0, description="多项式系数的 L2 权重")
    max_iterations: int = Field(default=50, ge=1)
    epsilon: float = Field(default=0.1, gt=0.0, description="绝对收敛阈值（absolute 模式与 fit_C 使用）")
    tolerance: Literal["relative", "absolute"] = "relative"
    relative_epsilon: float = Field(default=1e-4, gt=0.0, description="相对收敛阈值")
    min_sweeps: int = Field(default=5, ge=1, description="MSE 判据生效前的最少轮数")
    ridge_lambda2: Union[Literal["auto"], float] = Field(default="auto", description="Gram 正则项")

    def with_lambda(self, lambda1: float) -> "SolverOptions":
        """返回只替换 λ₁ 的副本"""
        return build_solver_options({**self.model_dump(), "lambda1": float(lambda1)})


def build_solver_options(values: Optional[Dict[str, Any]] = None) -> SolverOptions:
    """
    校验并构造 SolverOptions

    Args:
        values: 参数字典（通常来自配置文件的 solver 段与命令行覆盖）

    Returns:
        SolverOptions 实例
    """
    values = dict(values or {})
    ridge = values.get("ridge_lambda2")
    if ridge is not None and ridge != "auto":
        try:
            ridge = float(ridge)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"ridge_lambda2 必须是非负实数或 'auto'，实际: {ridge!r}") from e
        if ridge < 0:
            raise ConfigError(f"ridge_lambda2 必须 ≥ 0，实际: {ridge}")
        values["ridge_lambda2"] = ridge
    try:
        return SolverOptions(**values)
    except ValidationError as e:
        raise ConfigError(f"求解器参数校验失败: {e}") from e
