"""
闭包度量模块
判定每条边是否闭合有向二步路径，计算闭包比例、轨迹、k-linked 划分和关注者入度和
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from dclose.errors import GraphError, LabelError, MissingEdgeError
from dclose.graph import TemporalDigraph

logger = logging.getLogger(__name__)


@dataclass
class ClosureProfile:
    """单个节点的闭包画像"""
    node: int
    final_ratio: float
    trajectory: np.ndarray
    in_degree: int
    follower_indegree_sum: int
    same_community_follower_indegree_sum: Optional[int] = None


@dataclass(frozen=True)
class KLinkedStat:
    """S_k(C) 及其闭包比例 f_k

    counted 是参与 f_k 计算的成员数（排除无法判定的边后），
    counted 为 0 时 f_k 为 None。
    """
    k: int
    members: FrozenSet[int]
    closed: int
    counted: int

    @property
    def f_k(self) -> Optional[float]:
        if self.counted == 0:
            return None
        return self.closed / self.counted


# ============== 闭包判定 ==============

def detect_closure_stream(g: TemporalDigraph) -> np.ndarray:
    """按 seq 顺序流式判定，返回每条边的闭包标记

    边 A->C 到达时，若已存在 B 使 A->B 与 B->C 都已出现，则该边闭合。
    isdisjoint 会遍历较小的集合，单条边代价为 min(出度, 入度)。
    """
    if g.seq_synthetic:
        logger.warning("图的 seq 为合成值，流式判定结果仅在列表顺序可合并为全序时有意义")
    n = g.node_count
    out_sets: List[Set[int]] = [set() for _ in range(n)]
    in_sets: List[Set[int]] = [set() for _ in range(n)]
    flags = np.zeros(g.edge_count, dtype=bool)
    for src, dst, seq in g.iter_edges():
        if not out_sets[src].isdisjoint(in_sets[dst]):
            flags[seq] = True
        out_sets[src].add(dst)
        in_sets[dst].add(src)
    return flags


class _ListPositions:
    """L_in / L_out 中的位置索引，按需构建"""

    def __init__(self, g: TemporalDigraph):
        self.g = g
        self._in: Dict[int, Dict[int, int]] = {}
        self._out: Dict[int, Dict[int, int]] = {}
        self._in_lists: Dict[int, List[int]] = {}
        self._out_lists: Dict[int, List[int]] = {}

    def in_list(self, node: int) -> List[int]:
        lst = self._in_lists.get(node)
        if lst is None:
            lst = self._in_lists[node] = self.g.in_list(node)
        return lst

    def out_list(self, node: int) -> List[int]:
        lst = self._out_lists.get(node)
        if lst is None:
            lst = self._out_lists[node] = self.g.out_list(node)
        return lst

    def in_pos(self, node: int) -> Dict[int, int]:
        pos = self._in.get(node)
        if pos is None:
            pos = {v: i for i, v in enumerate(self.in_list(node))}
            self._in[node] = pos
        return pos

    def out_pos(self, node: int) -> Dict[int, int]:
        pos = self._out.get(node)
        if pos is None:
            pos = {v: i for i, v in enumerate(self.out_list(node))}
            self._out[node] = pos
        return pos

    def witness_exists(self, a: int, c: int) -> bool:
        in_c = self.in_pos(c)
        out_a = self.out_pos(a)
        a_at = in_c[a]
        c_at = out_a[c]
        if c_at <= a_at:
            followed_before = self.out_list(a)[:c_at]
            return any(in_c.get(b, a_at) < a_at for b in followed_before)
        earlier_followers = self.in_list(c)[:a_at]
        return any(out_a.get(b, c_at) < c_at for b in earlier_followers)


def exhibits_closure_lists(g: TemporalDigraph, a: int, c: int, _positions: Optional[_ListPositions] = None) -> bool:
    """列表判据：存在 B，在 L_in(C) 中先于 A，且在 L_out(A) 中先于 C"""
    if not g.has_edge(a, c):
        raise MissingEdgeError(f"边 ({a}, {c}) 不存在")
    positions = _positions or _ListPositions(g)
    return positions.witness_exists(a, c)


def detect_closure_lists(g: TemporalDigraph) -> np.ndarray:
    """对每条边应用列表判据，无法判定的边记为 False"""
    positions = _ListPositions(g)
    flags = np.zeros(g.edge_count, dtype=bool)
    for src, dst, seq in g.iter_edges():
        if g.is_determinable(src, dst):
            flags[seq] = positions.witness_exists(src, dst)
    return flags


def undeterminable_edges(g: TemporalDigraph) -> Set[int]:
    """缺少 L_in 或 L_out 信息的边的 seq 集合"""
    if g.in_known is None and g.out_known is None:
        return set()
    return {seq for src, dst, seq in g.iter_edges() if not g.is_determinable(src, dst)}


def detect_closure(g: TemporalDigraph) -> np.ndarray:
    """列表数据用列表判据，其余用流式判定"""
    if g.seq_synthetic:
        return detect_closure_lists(g)
    return detect_closure_stream(g)


# ============== 闭包比例 ==============

def _check_flags(g: TemporalDigraph, flags: np.ndarray):
    if len(flags) != g.edge_count:
        raise GraphError(f"闭包标记长度 {len(flags)} 与边数 {g.edge_count} 不一致")


def closure_trajectory(g: TemporalDigraph, flags: np.ndarray, node: int) -> np.ndarray:
    """按入边到达顺序的累计闭包比例，第 i 项为前 i+1 条入边中闭合的比例"""
    _check_flags(g, flags)
    seqs = g.in_seqs(node)
    if not seqs:
        return np.zeros(0, dtype=float)
    hits = np.cumsum(flags[np.asarray(seqs, dtype=np.int64)])
    return hits / np.arange(1, len(seqs) + 1)


def final_ratio(g: TemporalDigraph, flags: np.ndarray, node: int) -> float:
    seqs = g.in_seqs(node)
    if not seqs:
        return 0.0
    return float(np.count_nonzero(flags[np.asarray(seqs, dtype=np.int64)])) / len(seqs)


def final_ratios(g: TemporalDigraph, flags: np.ndarray) -> np.ndarray:
    """所有节点的最终闭包比例（入度为 0 的节点记为 0）"""
    _check_flags(g, flags)
    _, dst = g.edge_arrays()
    closed = np.bincount(dst, weights=flags.astype(float), minlength=g.node_count)
    degree = np.bincount(dst, minlength=g.node_count)
    ratios = np.zeros(g.node_count, dtype=float)
    np.divide(closed, degree, out=ratios, where=degree > 0)
    return ratios


def stabilization_index(trajectory: np.ndarray, tolerance: float = 0.02) -> Optional[int]:
    """从该下标起累计比例始终在最终值 ± tolerance 内；空轨迹返回 None"""
    traj = np.asarray(trajectory, dtype=float)
    if traj.size == 0:
        return None
    outside = np.nonzero(np.abs(traj - traj[-1]) > tolerance)[0]
    return int(outside[-1]) + 1 if outside.size else 0


# ============== k-linked ==============

def k_linked_partition(
    g: TemporalDigraph,
    node: int,
    flags: Optional[np.ndarray] = None,
    k_mode: str = "final",
    exclude: Optional[Iterable[int]] = None,
) -> List[KLinkedStat]:
    """按 k 划分 node 的关注者

    k_mode="final": k = A 在数据末尾关注的 node 的关注者数。
    k_mode="arrival": 只计入 A->node 到达时 A 已经关注、且已经关注 node 的关注者。
    先后以 A 的关注对象列表为准，对时序边表即 seq 顺序，对列表数据即 L_out 中的位置。
    exclude 中的边（seq）不计入 f_k 的分母，但仍属于对应的 S_k。
    """
    if k_mode not in ("final", "arrival"):
        raise ValueError(f"未知的 k_mode: {k_mode}")
    if flags is None:
        flags = detect_closure(g)
    _check_flags(g, flags)
    excluded = set(exclude or ())

    followers = g.in_list(node)
    follower_pos = {v: i for i, v in enumerate(followers)}
    edge_seqs = g.in_seqs(node)

    groups: Dict[int, List[int]] = {}
    closed: Dict[int, int] = {}
    counted: Dict[int, int] = {}
    for a, seq in zip(followers, edge_seqs):
        if k_mode == "final":
            k = sum(1 for b in g.out_list(a) if b in follower_pos)
        else:
            a_at = follower_pos[a]
            out = g.out_list(a)
            earlier = out[: out.index(node)]
            k = sum(1 for b in earlier if follower_pos.get(b, a_at) < a_at)
        groups.setdefault(k, []).append(a)
        if seq in excluded:
            continue
        counted[k] = counted.get(k, 0) + 1
        if flags[seq]:
            closed[k] = closed.get(k, 0) + 1

    return [
        KLinkedStat(k, frozenset(groups[k]), closed.get(k, 0), counted.get(k, 0))
        for k in sorted(groups)
    ]


# ============== 关注者入度和 ==============

def follower_indegree_sums(g: TemporalDigraph, node: int, same_community: bool = False) -> Tuple[int, Optional[int]]:
    """返回 (关注者入度和, 同社区关注者入度和)

    same_community=False 时第二项为 None；图没有社区标签时请求同社区和会报错。
    """
    if same_community and not g.has_communities:
        raise LabelError("图没有社区标签，无法计算同社区关注者入度和")
    followers = g.in_list(node)
    total = sum(g.in_degree(x) for x in followers)
    if not same_community:
        return total, None
    label = g.communities[node]
    same = sum(g.in_degree(x) for x in followers if g.communities[x] == label)
    return total, same


def all_follower_indegree_sums(g: TemporalDigraph, same_community: bool = False) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """所有节点的 follower_indegree_sums，向量化版本"""
    if same_community and not g.has_communities:
        raise LabelError("图没有社区标签，无法计算同社区关注者入度和")
    n = g.node_count
    src, dst = g.edge_arrays()
    degree = np.bincount(dst, minlength=n)
    total = np.bincount(dst, weights=degree[src], minlength=n).astype(np.int64)
    if not same_community:
        return total, None
    labels = np.asarray(g.communities, dtype=np.int64)
    mask = labels[src] == labels[dst]
    same = np.bincount(dst[mask], weights=degree[src[mask]], minlength=n).astype(np.int64)
    return total, same


def select_celebrities(g: TemporalDigraph, min_in: int = 10000, max_in: int = 50000) -> List[int]:
    """入度在 [min_in, max_in] 内的节点（μ-celebrity）"""
    degrees = g.in_degrees()
    return [int(v) for v in np.nonzero((degrees >= min_in) & (degrees <= max_in))[0]]


# ============== 画像 ==============

def closure_profile(g: TemporalDigraph, flags: np.ndarray, node: int, same_community: bool = False) -> ClosureProfile:
    trajectory = closure_trajectory(g, flags, node)
    total, same = follower_indegree_sums(g, node, same_community=same_community)
    return ClosureProfile(
        node=node,
        final_ratio=float(trajectory[-1]) if trajectory.size else 0.0,
        trajectory=trajectory,
        in_degree=g.in_degree(node),
        follower_indegree_sum=total,
        same_community_follower_indegree_sum=same,
    )


def closure_profiles(
    g: TemporalDigraph,
    flags: np.ndarray,
    nodes: Iterable[int],
    same_community: bool = False,
    workers: int = 1,
) -> List[ClosureProfile]:
    """批量计算画像，结果顺序与 nodes 一致"""
    nodes = list(nodes)
    if workers <= 1:
        return [closure_profile(g, flags, v, same_community) for v in nodes]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda v: closure_profile(g, flags, v, same_community), nodes))
