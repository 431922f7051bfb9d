"""
实验与随机化检验服务
"""

import logging

import numpy as np

from dclose.baseline import rand_test
from dclose.errors import ConfigError
from dclose.report import run_experiment
from dclose.schemas import parse_experiment_config

from .schemas import ExperimentRequest, ExperimentResponse, RandTestRequest, RandTestResponse, RandTestRowModel
from .state import STATE

logger = logging.getLogger(__name__)


def run_experiment_request(req: ExperimentRequest) -> ExperimentResponse:
    """在 results/<name>/ 下运行一次完整实验"""
    data = req.model_dump(mode="json", exclude={"name"})
    data["out_dir"] = str(STATE.results_dir / req.name)
    config = parse_experiment_config(data)
    STATE.task_started("experiments")
    try:
        bundle = run_experiment(config)
    finally:
        STATE.task_finished("experiments")
    return ExperimentResponse(
        out_dir=str(bundle.out_dir),
        files=sorted(bundle.files),
        summary=bundle.summary,
    )


def run_randtest_request(req: RandTestRequest) -> RandTestResponse:
    """对缓存中的生成图做随机化检验"""
    trace, flags = STATE.get_graph(req.model)
    g = trace.graph
    node = req.node if req.node is not None else g.top_by_in_degree(1)[0]
    if not 0 <= node < g.node_count:
        raise ConfigError(f"节点不存在: {node}")
    STATE.task_started("randtests")
    try:
        report = rand_test(g, flags, node, runs=req.runs, rng=np.random.default_rng(req.seed), k_mode=req.k_mode)
    finally:
        STATE.task_finished("randtests")
    return RandTestResponse(
        node=node,
        in_degree=g.in_degree(node),
        k_mode=report.k_mode,
        crossover_K=report.crossover_label,
        rows=[
            RandTestRowModel(
                k=row.k,
                size=row.size,
                observed=row.observed,
                baseline_mean=row.baseline.mean,
                baseline_min=row.baseline.min,
                baseline_max=row.baseline.max,
                above_max=row.above_max,
                within=row.within,
            )
            for row in report.rows
        ],
    )
