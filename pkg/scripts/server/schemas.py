"""
Pydantic 请求/响应模型
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from dclose.schemas import ALL_ANALYSES, AnalysisName, AnalysisOptions, CelebrityBounds, ModelParams


class ExperimentRequest(BaseModel):
    """实验请求，结果写入 results/<name>/"""
    name: str = Field("default", pattern=r"^[\w-]+$")
    model: Optional[ModelParams] = None
    input_path: Optional[str] = None
    input_format: Literal["csv", "lists"] = "csv"
    handles_path: Optional[str] = None
    analyses: List[AnalysisName] = Field(default_factory=lambda: list(ALL_ANALYSES))
    seed: int = 1
    analysis: AnalysisOptions = Field(default_factory=AnalysisOptions)
    celebrity: CelebrityBounds = Field(default_factory=CelebrityBounds)


class ExperimentResponse(BaseModel):
    """实验响应"""
    out_dir: str
    files: List[str]
    summary: dict


class RandTestRequest(BaseModel):
    """随机化检验请求；不指定节点时取入度最高的节点"""
    model: ModelParams = Field(default_factory=ModelParams)
    node: Optional[int] = None
    runs: int = Field(100, ge=1)
    k_mode: Literal["final", "arrival"] = "final"
    seed: int = 1


class RandTestRowModel(BaseModel):
    k: int
    size: int
    observed: float
    baseline_mean: float
    baseline_min: float
    baseline_max: float
    above_max: bool
    within: bool


class RandTestResponse(BaseModel):
    """随机化检验响应"""
    node: int
    in_degree: int
    k_mode: str
    crossover_K: str  # 从未落入基线区间时为 "inf"
    rows: List[RandTestRowModel]


class HealthResponse(BaseModel):
    status: str
    cached_graphs: List[str]
    cache_size: int
    running: Dict[str, int]
