"""
生成模型模块
偏好连接、带 fitness 的偏好连接、带社区的偏好连接
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from dclose.errors import ConfigError
from dclose.graph import TemporalDigraph
from dclose.sampling import WeightTree
from dclose.schemas import ModelKind, ModelParams

logger = logging.getLogger(__name__)

# 每个新节点重复抽样的次数上限为 RESAMPLE_FACTOR * D
RESAMPLE_FACTOR = 100
PROGRESS_EVERY = 50_000


@dataclass
class GrowthTrace:
    """生成结果：图 + 参数。fitness/社区标签保存在图上"""
    graph: TemporalDigraph
    params: ModelParams

    @property
    def fitness(self) -> Optional[List[float]]:
        return self.graph.fitness

    @property
    def communities(self) -> Optional[List[int]]:
        return self.graph.communities


def _check_kind(params: ModelParams, expected: ModelKind):
    if params.kind != expected:
        raise ConfigError(f"参数类型为 {params.kind.value}，但调用的是 {expected.value} 生成器")


def _rng_for(params: ModelParams, rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(params.seed)


def _log_progress(j: int, n: int, g: TemporalDigraph):
    if j % PROGRESS_EVERY == 0:
        logger.info(f"生成进度: {j}/{n} 节点, {g.edge_count} 条边")


def _pick_unused(candidates: Sequence[int], chosen: set, k: int, rng: np.random.Generator) -> List[int]:
    """从未使用的候选中无放回均匀抽取 k 个"""
    unused = [v for v in candidates if v not in chosen]
    if not unused or k <= 0:
        return []
    picked = rng.choice(len(unused), size=min(k, len(unused)), replace=False)
    return [unused[i] for i in picked]


def _choose_targets(
    draw: Callable[[], int],
    n_targets: int,
    fallback_candidates: Callable[[], Sequence[int]],
    D: int,
    rng: np.random.Generator,
) -> List[int]:
    """为一个新节点选出 n_targets 个不同终点

    重复的终点整轮重新抽样（重新掷 alpha/beta 硬币），
    超过 RESAMPLE_FACTOR * D 次后改为从剩余候选中无放回均匀抽取。
    """
    chosen: List[int] = []
    chosen_set = set()
    attempts = 0
    cap = RESAMPLE_FACTOR * D
    while len(chosen) < n_targets and attempts < cap:
        attempts += 1
        t = draw()
        if t in chosen_set:
            continue
        chosen.append(t)
        chosen_set.add(t)
    if len(chosen) < n_targets:
        chosen.extend(_pick_unused(fallback_candidates(), chosen_set, n_targets - len(chosen), rng))
    return chosen


def _grow_preferential(
    params: ModelParams,
    rng: np.random.Generator,
    fitness: Optional[List[float]],
) -> TemporalDigraph:
    """pa 与 pa_fitness 共用的生长过程

    每条边以概率 alpha 从 {1..j-1} 均匀选终点，否则按权重选择；
    权重为入度（pa）或 入度 × fitness（pa_fitness）。
    """
    N, D, alpha = params.N, params.D, params.alpha
    g = TemporalDigraph(2, fitness=fitness[:2] if fitness is not None else None)
    in_deg = [0] * N
    gain = fitness if fitness is not None else [1] * N

    g.append_edge(1, 0)
    in_deg[0] = 1
    tree = WeightTree([gain[0], 0])
    positive = 1  # 入度为正的节点数

    for j in range(2, N):
        g.add_node(fitness=fitness[j] if fitness is not None else None)
        if alpha >= 1.0:
            available = j - 1
        elif alpha <= 0.0:
            available = positive
        else:
            # {1..j-1} ∪ {入度为正的节点}，节点 0 始终有入度
            available = j
        n_targets = min(D, available)

        if alpha <= 0.0:
            def draw():
                return tree.sample(rng)
        elif alpha >= 1.0:
            def draw():
                return int(rng.integers(1, j))
        else:
            def draw():
                if rng.random() < alpha:
                    return int(rng.integers(1, j))
                return tree.sample(rng)

        def fallback_candidates():
            if alpha >= 1.0:
                return range(1, j)
            if alpha <= 0.0:
                return [v for v in range(j) if in_deg[v] > 0]
            return range(j)

        for t in _choose_targets(draw, n_targets, fallback_candidates, D, rng):
            g.append_edge(j, t)
            if in_deg[t] == 0:
                positive += 1
            in_deg[t] += 1
            tree.add(t, gain[t])
        tree.append(0)
        _log_progress(j, N, g)

    return g


def generate_pa(params: ModelParams, rng: Optional[np.random.Generator] = None) -> GrowthTrace:
    """偏好连接模型"""
    _check_kind(params, ModelKind.PA)
    rng = _rng_for(params, rng)
    logger.info(f"生成 PA 图: N={params.N}, D={params.D}, alpha={params.alpha}, seed={params.seed}")
    g = _grow_preferential(params, rng, fitness=None)
    return GrowthTrace(g, params)


def draw_fitness(rng: np.random.Generator) -> float:
    """fitness ∈ (0, 1) 均匀分布"""
    f = rng.random()
    while f <= 0.0:
        f = rng.random()
    return float(f)


def generate_pa_fitness(
    params: ModelParams,
    rng: Optional[np.random.Generator] = None,
    fitness: Optional[Sequence[float]] = None,
) -> GrowthTrace:
    """带 fitness 的偏好连接模型

    fitness 可以显式给出（例如全部相等，用来与普通 PA 对照），
    否则每个节点的 fitness 按节点编号顺序从 (0,1) 均匀抽取。
    """
    _check_kind(params, ModelKind.PA_FITNESS)
    rng = _rng_for(params, rng)
    if fitness is None:
        values = [draw_fitness(rng) for _ in range(params.N)]
    else:
        values = [float(f) for f in fitness]
        if len(values) != params.N or any(not 0.0 < f < 1.0 for f in values):
            raise ConfigError("fitness 必须是 N 个 (0,1) 内的数")
    logger.info(f"生成 PA-fitness 图: N={params.N}, D={params.D}, alpha={params.alpha}, seed={params.seed}")
    g = _grow_preferential(params, rng, fitness=values)
    return GrowthTrace(g, params)


def generate_pa_communities(params: ModelParams, rng: Optional[np.random.Generator] = None) -> GrowthTrace:
    """带社区的偏好连接模型

    初始 C 个社区各两个节点：社区 i 为节点 2i、2i+1，边 2i+1 -> 2i。
    之后每个节点均匀分配社区；每条边先以 beta 决定候选池（本社区 / 全部已有节点），
    再以 alpha 决定按入度偏好选择，否则在池内均匀选择。
    池内总入度为零时退化为均匀选择。
    """
    _check_kind(params, ModelKind.PA_COMMUNITIES)
    rng = _rng_for(params, rng)
    N, D, C = params.N, params.D, params.C
    alpha, beta = params.alpha, params.beta
    logger.info(
        f"生成 PA-communities 图: N={N}, D={D}, C={C}, alpha={alpha}, beta={beta}, seed={params.seed}"
    )

    communities = [0] * N
    for i in range(C):
        communities[2 * i] = i
        communities[2 * i + 1] = i
    g = TemporalDigraph(2 * C, communities=communities[: 2 * C])

    members: List[List[int]] = [[2 * i, 2 * i + 1] for i in range(C)]
    local_index = [0] * N
    comm_trees: List[WeightTree] = []
    global_tree = WeightTree()
    for i in range(C):
        local_index[2 * i] = 0
        local_index[2 * i + 1] = 1
        comm_trees.append(WeightTree([1, 0]))
        global_tree.append(1)
        global_tree.append(0)
        g.append_edge(2 * i + 1, 2 * i)

    for j in range(2 * C, N):
        comm = int(rng.integers(C))
        communities[j] = comm
        g.add_node(community=comm)
        pool_members = members[comm]
        pool_tree = comm_trees[comm]
        available = j if beta < 1.0 else len(pool_members)
        n_targets = min(D, available)

        def draw():
            if rng.random() < beta:
                cands, tree = pool_members, pool_tree
            else:
                cands, tree = None, global_tree
            if rng.random() < alpha and tree.total > 0:
                return tree.sample(rng) if cands is None else cands[tree.sample(rng)]
            if cands is None:
                return int(rng.integers(j))
            return cands[int(rng.integers(len(cands)))]

        def fallback_candidates():
            return range(j) if beta < 1.0 else list(pool_members)

        for t in _choose_targets(draw, n_targets, fallback_candidates, D, rng):
            g.append_edge(j, t)
            global_tree.add(t, 1)
            comm_trees[communities[t]].add(local_index[t], 1)

        local_index[j] = len(pool_members)
        pool_members.append(j)
        pool_tree.append(0)
        global_tree.append(0)
        _log_progress(j, N, g)

    return GrowthTrace(g, params)


GENERATORS = {
    ModelKind.PA: generate_pa,
    ModelKind.PA_FITNESS: generate_pa_fitness,
    ModelKind.PA_COMMUNITIES: generate_pa_communities,
}


def generate(params: ModelParams, rng: Optional[np.random.Generator] = None) -> GrowthTrace:
    """按 params.kind 调用对应生成器"""
    return GENERATORS[params.kind](params, rng)
