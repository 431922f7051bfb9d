"""
时序有向图模块
边按到达顺序编号（seq），出/入邻接表按到达顺序保存
"""

import hashlib
import logging
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from dclose.errors import DuplicateEdgeError, GraphError, SelfLoopError, UnknownNodeError

logger = logging.getLogger(__name__)


class EdgeRecord(NamedTuple):
    """一条有向边及其全局到达序号"""
    src: int
    dst: int
    seq: int


class TemporalDigraph:
    """时序有向图

    节点为 [0, node_count) 内的连续整数。seq 是插入时分配的稠密序号，
    不是真实时间戳。由关注列表构造的图 seq 为合成值（seq_synthetic=True），
    此时邻接表顺序以列表为准。
    """

    def __init__(
        self,
        node_count: int = 0,
        communities: Optional[Sequence[int]] = None,
        fitness: Optional[Sequence[float]] = None,
    ):
        if node_count < 0:
            raise GraphError(f"节点数不能为负: {node_count}")
        if communities is not None and len(communities) != node_count:
            raise GraphError("社区标签数量与节点数不一致")
        if fitness is not None and len(fitness) != node_count:
            raise GraphError("fitness 数量与节点数不一致")
        self._src: List[int] = []
        self._dst: List[int] = []
        self._out: List[List[int]] = [[] for _ in range(node_count)]
        self._in: List[List[int]] = [[] for _ in range(node_count)]
        # dst -> seq，用于去重和 O(1) 查边
        self._out_index: List[Dict[int, int]] = [{} for _ in range(node_count)]
        self.communities: Optional[List[int]] = list(communities) if communities is not None else None
        self.fitness: Optional[List[float]] = list(fitness) if fitness is not None else None
        self.seq_synthetic = False
        # None 表示全部已知；列表数据中只有提供了对应列表的节点才在集合里
        self.in_known: Optional[Set[int]] = None
        self.out_known: Optional[Set[int]] = None

    # ============== 构造 ==============

    @classmethod
    def from_pairs(cls, node_count: int, pairs, communities=None, fitness=None) -> "TemporalDigraph":
        g = cls(node_count, communities=communities, fitness=fitness)
        for src, dst in pairs:
            g.append_edge(src, dst)
        return g

    def add_node(self, community: Optional[int] = None, fitness: Optional[float] = None) -> int:
        """追加一个节点，返回其编号；标签检查失败时图保持不变"""
        if self.communities is not None and community is None:
            raise GraphError("带社区标签的图新增节点必须给出社区")
        if self.fitness is not None and fitness is None:
            raise GraphError("带 fitness 的图新增节点必须给出 fitness")
        node = len(self._out)
        self._out.append([])
        self._in.append([])
        self._out_index.append({})
        if self.communities is not None:
            self.communities.append(int(community))
        if self.fitness is not None:
            self.fitness.append(float(fitness))
        return node

    def append_edge(self, src: int, dst: int) -> int:
        """追加一条边，返回其 seq"""
        n = len(self._out)
        if not (0 <= src < n) or not (0 <= dst < n):
            raise UnknownNodeError(f"未知节点: ({src}, {dst})，节点数 {n}")
        if src == dst:
            raise SelfLoopError(f"不允许自环: {src}")
        index = self._out_index[src]
        if dst in index:
            raise DuplicateEdgeError(f"重复的边: ({src}, {dst})")
        seq = len(self._src)
        self._src.append(src)
        self._dst.append(dst)
        self._out[src].append(seq)
        self._in[dst].append(seq)
        index[dst] = seq
        return seq

    def reorder_adjacency(
        self,
        out_orders: Dict[int, List[int]],
        in_orders: Dict[int, List[int]],
    ):
        """按给定的邻居顺序重排邻接表，并标记 seq 为合成值

        out_orders[a] 是 a 的关注对象顺序，in_orders[c] 是 c 的关注者顺序，
        必须恰好是该节点现有邻居的一个排列。
        """
        for node, order in out_orders.items():
            seqs = [self._out_index[node][dst] for dst in order]
            if sorted(seqs) != sorted(self._out[node]):
                raise GraphError(f"节点 {node} 的出边顺序与边集不一致")
            self._out[node] = seqs
        for node, order in in_orders.items():
            seqs = []
            for src in order:
                seq = self._out_index[src].get(node)
                if seq is None:
                    raise GraphError(f"节点 {node} 的入边顺序包含不存在的边 ({src}, {node})")
                seqs.append(seq)
            if sorted(seqs) != sorted(self._in[node]):
                raise GraphError(f"节点 {node} 的入边顺序与边集不一致")
            self._in[node] = seqs
        self.seq_synthetic = True

    # ============== 查询 ==============

    @property
    def node_count(self) -> int:
        return len(self._out)

    @property
    def edge_count(self) -> int:
        return len(self._src)

    @property
    def has_communities(self) -> bool:
        return self.communities is not None

    @property
    def edges(self) -> List[EdgeRecord]:
        return list(self.iter_edges())

    def iter_edges(self) -> Iterator[EdgeRecord]:
        for seq, (src, dst) in enumerate(zip(self._src, self._dst)):
            yield EdgeRecord(src, dst, seq)

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(src, dst) 两个按 seq 排列的数组"""
        return np.asarray(self._src, dtype=np.int64), np.asarray(self._dst, dtype=np.int64)

    def edge(self, seq: int) -> EdgeRecord:
        return EdgeRecord(self._src[seq], self._dst[seq], seq)

    def edge_seq(self, src: int, dst: int) -> Optional[int]:
        self._check_node(src)
        return self._out_index[src].get(dst)

    def has_edge(self, src: int, dst: int) -> bool:
        return self.edge_seq(src, dst) is not None

    def out_adj(self, node: int) -> List[Tuple[int, int]]:
        """(dst, seq) 列表，按到达顺序"""
        self._check_node(node)
        dst = self._dst
        return [(dst[s], s) for s in self._out[node]]

    def in_adj(self, node: int) -> List[Tuple[int, int]]:
        """(src, seq) 列表，按到达顺序"""
        self._check_node(node)
        src = self._src
        return [(src[s], s) for s in self._in[node]]

    def out_seqs(self, node: int) -> List[int]:
        return self._out[node]

    def in_seqs(self, node: int) -> List[int]:
        return self._in[node]

    def in_list(self, node: int) -> List[int]:
        """关注者列表 L_in，按时间顺序"""
        self._check_node(node)
        src = self._src
        return [src[s] for s in self._in[node]]

    def out_list(self, node: int) -> List[int]:
        """关注对象列表 L_out，按时间顺序"""
        self._check_node(node)
        dst = self._dst
        return [dst[s] for s in self._out[node]]

    def in_degree(self, node: int) -> int:
        return len(self._in[node])

    def out_degree(self, node: int) -> int:
        return len(self._out[node])

    def in_degrees(self) -> np.ndarray:
        return np.fromiter((len(x) for x in self._in), dtype=np.int64, count=len(self._in))

    def out_degrees(self) -> np.ndarray:
        return np.fromiter((len(x) for x in self._out), dtype=np.int64, count=len(self._out))

    def top_by_in_degree(self, m: int) -> List[int]:
        """入度最高的 m 个节点，入度相同时编号小的在前"""
        degrees = self.in_degrees()
        order = np.lexsort((np.arange(len(degrees)), -degrees))
        return [int(v) for v in order[:m]]

    def is_determinable(self, src: int, dst: int) -> bool:
        """列表数据里边 src->dst 的闭包状态是否可判定"""
        if self.in_known is not None and dst not in self.in_known:
            return False
        if self.out_known is not None and src not in self.out_known:
            return False
        return True

    def _check_node(self, node: int):
        if not (0 <= node < len(self._out)):
            raise UnknownNodeError(f"未知节点: {node}")

    # ============== 子图与导出 ==============

    def induced_follower_subgraph(self, center: int) -> Tuple["TemporalDigraph", Dict[int, int]]:
        """{center} ∪ 关注者 上的导出子图

        center 映射为 0，关注者按 L_in 顺序映射为 1..k。保留边的相对顺序，
        seq 重新连续编号。返回 (子图, 旧编号 -> 新编号)。
        """
        followers = self.in_list(center)
        mapping = {center: 0}
        for i, v in enumerate(followers, start=1):
            mapping[v] = i

        kept = sorted(
            seq
            for v in mapping
            for seq in self._out[v]
            if self._dst[seq] in mapping
        )
        communities = None
        fitness = None
        members = sorted(mapping, key=mapping.get)
        if self.communities is not None:
            communities = [self.communities[v] for v in members]
        if self.fitness is not None:
            fitness = [self.fitness[v] for v in members]

        sub = TemporalDigraph(len(mapping), communities=communities, fitness=fitness)
        for seq in kept:
            sub.append_edge(mapping[self._src[seq]], mapping[self._dst[seq]])

        if self.seq_synthetic:
            out_orders = {
                mapping[v]: [mapping[d] for d in self.out_list(v) if d in mapping]
                for v in members
            }
            in_orders = {
                mapping[v]: [mapping[s] for s in self.in_list(v) if s in mapping]
                for v in members
            }
            sub.reorder_adjacency(out_orders, in_orders)
        if self.in_known is not None:
            sub.in_known = {mapping[v] for v in self.in_known if v in mapping}
        if self.out_known is not None:
            sub.out_known = {mapping[v] for v in self.out_known if v in mapping}
        return sub, mapping

    def to_networkx(self) -> nx.DiGraph:
        nxg = nx.DiGraph()
        for v in range(self.node_count):
            attrs = {}
            if self.communities is not None:
                attrs["community"] = self.communities[v]
            if self.fitness is not None:
                attrs["fitness"] = self.fitness[v]
            nxg.add_node(v, **attrs)
        nxg.add_edges_from(
            (src, dst, {"seq": seq}) for seq, (src, dst) in enumerate(zip(self._src, self._dst))
        )
        return nxg

    def fingerprint(self) -> str:
        """图内容摘要，用于确认分析过程没有修改输入图"""
        h = hashlib.sha256()
        h.update(str(self.node_count).encode())
        h.update(np.asarray(self._src, dtype=np.int64).tobytes())
        h.update(np.asarray(self._dst, dtype=np.int64).tobytes())
        for v in range(self.node_count):
            h.update(np.asarray(self._out[v], dtype=np.int64).tobytes())
            h.update(np.asarray(self._in[v], dtype=np.int64).tobytes())
        if self.communities is not None:
            h.update(np.asarray(self.communities, dtype=np.int64).tobytes())
        if self.fitness is not None:
            h.update(np.asarray(self.fitness, dtype=np.float64).tobytes())
        return h.hexdigest()

    def __repr__(self) -> str:
        return f"TemporalDigraph(nodes={self.node_count}, edges={self.edge_count})"
