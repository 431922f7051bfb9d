"""
Pydantic 参数与配置模型
"""

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from dclose.errors import ConfigError


class ModelKind(str, Enum):
    """生成模型类型"""
    PA = "pa"
    PA_FITNESS = "pa_fitness"
    PA_COMMUNITIES = "pa_communities"


ALPHA_NOTE = {
    ModelKind.PA: "alpha = 均匀选择终点的概率",
    ModelKind.PA_FITNESS: "alpha = 均匀选择终点的概率",
    ModelKind.PA_COMMUNITIES: "alpha = 按入度偏好选择终点的概率（与 pa 模型相反）",
}


class ModelParams(BaseModel):
    """生成模型参数"""
    kind: ModelKind = ModelKind.PA
    alpha: float = Field(0.3, ge=0.0, le=1.0)
    beta: float = Field(0.8, ge=0.0, le=1.0)  # 仅社区模型使用
    D: int = Field(10, ge=1)
    N: int = Field(10000, ge=2)
    C: int = Field(1, ge=1)  # 社区数，仅社区模型使用
    seed: int = 1

    @model_validator(mode="after")
    def _check_kind_constraints(self):
        if self.kind == ModelKind.PA_COMMUNITIES:
            if not 0.5 <= self.beta <= 1.0:
                raise ValueError(f"社区模型要求 beta ∈ [0.5, 1]，当前 {self.beta}")
            if self.N < 2 * self.C:
                raise ValueError(f"社区模型要求 N >= 2C，当前 N={self.N}, C={self.C}")
        return self

    @property
    def alpha_note(self) -> str:
        return ALPHA_NOTE[self.kind]

    @property
    def uniform_probability(self) -> float:
        """每条边均匀选择终点的概率（统一两种 alpha 含义）"""
        if self.kind == ModelKind.PA_COMMUNITIES:
            return 1.0 - self.alpha
        return self.alpha


class AnalysisOptions(BaseModel):
    """分析选项"""
    top_m: int = Field(10, ge=1)
    corr_top: int = Field(100, ge=3)
    runs: int = Field(100, ge=1)
    k_mode: Literal["final", "arrival"] = "final"
    exclude_undeterminable: bool = False
    community_analysis: bool = False
    heuristic_trace: bool = False
    trace_steps: int = Field(50, ge=1)
    stabilization_tolerance: float = Field(0.02, gt=0.0)
    randtest_nodes: List[int] = Field(default_factory=list)
    workers: int = Field(1, ge=1)


class CelebrityBounds(BaseModel):
    """μ-celebrity 入度区间（闭区间）"""
    min_in: int = Field(10000, ge=0)
    max_in: int = Field(50000, ge=0)

    @model_validator(mode="after")
    def _check_order(self):
        if self.min_in > self.max_in:
            raise ValueError("celebrity.min_in 不能大于 max_in")
        return self


AnalysisName = Literal["trajectory", "profile", "randtest", "approx", "correlation"]
ALL_ANALYSES: List[str] = ["trajectory", "profile", "randtest", "approx", "correlation"]


class ExperimentConfig(BaseModel):
    """一次实验的完整配置"""
    model: Optional[ModelParams] = None
    input_path: Optional[str] = None
    input_format: Literal["csv", "lists"] = "csv"
    handles_path: Optional[str] = None
    analyses: List[AnalysisName] = Field(default_factory=lambda: list(ALL_ANALYSES))
    out_dir: str = "out"
    seed: int = 1
    analysis: AnalysisOptions = Field(default_factory=AnalysisOptions)
    celebrity: CelebrityBounds = Field(default_factory=CelebrityBounds)

    @model_validator(mode="after")
    def _check_source(self):
        # model 与 input_path 同时给出时，model 描述已保存的生成图（用于 approx）
        if self.model is None and self.input_path is None:
            raise ValueError("必须指定 model 或 input_path")
        if self.model is not None and self.input_path is not None and self.input_format != "csv":
            raise ValueError("只有边 CSV 可以搭配 model 参数读入")
        if self.analysis.community_analysis and self.model is not None \
                and self.model.kind != ModelKind.PA_COMMUNITIES:
            raise ValueError(f"社区分析需要 pa_communities 模型，当前 {self.model.kind.value}")
        if "approx" in self.analyses and self.model is None:
            raise ValueError("approx 分析需要由生成模型得到的图")
        return self


def _validate(model_cls, data: dict):
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        errors = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"配置无效: {errors}") from e


def parse_model_params(data: dict) -> ModelParams:
    return _validate(ModelParams, data)


def parse_experiment_config(data: dict) -> ExperimentConfig:
    return _validate(ExperimentConfig, data)
