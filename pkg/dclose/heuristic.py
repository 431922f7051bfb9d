"""
闭包比例启发式近似模块

S_t(j) = a·|F_t(j)|/N_t + (1-a)·d_t(F_t(j))/E_t  （a 为均匀选择终点的概率）
C_t(j) = 1 - (1 - (1 - S_t(j))^D) / (D·S_t(j))
最终闭包比例近似为 C_{N-1}(j)。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from dclose.errors import StatisticsError
from dclose.graph import TemporalDigraph
from dclose.models import GrowthTrace

logger = logging.getLogger(__name__)


@dataclass
class HeuristicSnapshot:
    """时刻 t 的图统计：E_t、N_t、各节点入度 |F_t(j)| 和关注者入度和 d_t(F_t(j))"""
    t: int
    E_t: int
    N_t: int
    in_degree: np.ndarray
    follower_sum: np.ndarray


class HeuristicPoint(NamedTuple):
    t: int
    in_degree: int
    s: float
    c: float


def snapshot(g: TemporalDigraph, t: Optional[int] = None, _edges=None) -> HeuristicSnapshot:
    """节点按编号顺序到达，时刻 t 的图由 0..t 号节点及其出边组成；t 默认为 N-1"""
    n = g.node_count
    t = n - 1 if t is None else t
    if not 0 <= t < n:
        raise ValueError(f"t 超出范围: {t}")
    src, dst = _edges if _edges is not None else g.edge_arrays()
    mask = src <= t
    src_t, dst_t = src[mask], dst[mask]
    in_degree = np.bincount(dst_t, minlength=n)
    follower_sum = np.bincount(dst_t, weights=in_degree[src_t], minlength=n).astype(np.int64)
    return HeuristicSnapshot(t=t, E_t=int(mask.sum()), N_t=t + 1, in_degree=in_degree, follower_sum=follower_sum)


def s_t(j: int, snap: HeuristicSnapshot, alpha: float) -> float:
    """新边指向某个 j 的关注者的概率"""
    if snap.E_t <= 0:
        raise StatisticsError("E_t = 0，尚无边，S_t 无定义")
    if snap.N_t <= 0:
        raise StatisticsError("N_t = 0")
    return alpha * snap.in_degree[j] / snap.N_t + (1 - alpha) * snap.follower_sum[j] / snap.E_t


def s_values(snap: HeuristicSnapshot, alpha: float) -> np.ndarray:
    if snap.E_t <= 0:
        raise StatisticsError("E_t = 0，尚无边，S_t 无定义")
    return alpha * snap.in_degree / snap.N_t + (1 - alpha) * snap.follower_sum / snap.E_t


def c_t(s: float, D: int) -> float:
    """闭式 C_t；s = 0 时取极限 0"""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s 必须在 [0, 1] 内: {s}")
    if D < 1:
        raise ValueError(f"D 必须 >= 1: {D}")
    if s == 0.0:
        return 0.0
    if s == 1.0:
        return 1.0 - 1.0 / D
    # 1 - (1-s)^D 用 expm1/log1p 计算，避免 s 很小时相消
    hit = -math.expm1(D * math.log1p(-s))
    return 1.0 - hit / (D * s)


def c_t_stepwise(s: float, D: int) -> float:
    """逐边平均形式 (1/D)·Σ_{d=1..D} [1 - (1-s)^{d-1}]"""
    return sum(1.0 - (1.0 - s) ** (d - 1) for d in range(1, D + 1)) / D


def c_values(s: np.ndarray, D: int) -> np.ndarray:
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    hit = -np.expm1(D * np.log1p(-s[mid]))
    out[mid] = 1.0 - hit / (D * s[mid])
    out[s == 1.0] = 1.0 - 1.0 / D
    return out


def approx_final_ratios(trace: GrowthTrace, alpha: Optional[float] = None, D: Optional[int] = None) -> np.ndarray:
    """每个节点的 C_{N-1}(j)

    alpha 缺省取模型的均匀选择概率（社区模型为 1 - alpha），D 缺省取模型参数。
    """
    alpha = trace.params.uniform_probability if alpha is None else alpha
    D = trace.params.D if D is None else D
    snap = snapshot(trace.graph)
    values = c_values(s_values(snap, alpha), D)
    logger.info(f"启发式近似完成: {len(values)} 个节点, alpha={alpha}, D={D}")
    return values


def heuristic_trace(
    trace: GrowthTrace,
    node: int,
    steps: int = 50,
    alpha: Optional[float] = None,
    D: Optional[int] = None,
) -> List[HeuristicPoint]:
    """在 [node+1, N-1] 上等距取 steps 个时刻，记录 S_t(node) 与 C_t(node)"""
    g = trace.graph
    alpha = trace.params.uniform_probability if alpha is None else alpha
    D = trace.params.D if D is None else D
    start = min(node + 1, g.node_count - 1)
    times: Sequence[int] = sorted(set(np.linspace(start, g.node_count - 1, num=steps, dtype=np.int64).tolist()))
    edges = g.edge_arrays()
    points = []
    for t in times:
        snap = snapshot(g, int(t), _edges=edges)
        if snap.E_t == 0:
            continue
        s = float(min(max(s_t(node, snap, alpha), 0.0), 1.0))
        points.append(HeuristicPoint(int(t), int(snap.in_degree[node]), s, c_t(s, D)))
    return points
