"""
文件格式模块
关注列表文件（按时间排序的 L_in / L_out）与时序边表 CSV 的读写
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from dclose.errors import ParseError
from dclose.graph import TemporalDigraph

logger = logging.getLogger(__name__)

LIST_LINE = re.compile(r"^(in|out)\s+(\S+?)\s*:\s*(.*)$")
EDGE_COLUMNS = ["src", "dst", "seq"]


def normalize_handle(handle: str) -> str:
    return handle.strip().lower()


class HandleMap:
    """用户名 <-> 节点编号 的双射"""

    def __init__(self, handles: Iterable[str] = ()):
        self._ids: Dict[str, int] = {}
        self._handles: List[str] = []
        for h in handles:
            self.add(h)

    def __len__(self) -> int:
        return len(self._handles)

    def __contains__(self, handle: str) -> bool:
        return normalize_handle(handle) in self._ids

    def add(self, handle: str) -> int:
        key = normalize_handle(handle)
        node = self._ids.get(key)
        if node is None:
            node = len(self._handles)
            self._ids[key] = node
            self._handles.append(key)
        return node

    def to_id(self, handle: str) -> int:
        return self._ids[normalize_handle(handle)]

    def handle(self, node: int) -> str:
        return self._handles[node]

    @property
    def handles(self) -> List[str]:
        return list(self._handles)

    @classmethod
    def numbered(cls, node_count: int) -> "HandleMap":
        """生成图的默认用户名 n0, n1, ..."""
        return cls(f"n{v}" for v in range(node_count))

    def save(self, path):
        pd.DataFrame({"node": range(len(self._handles)), "handle": self._handles}).to_csv(
            path, index=False, lineterminator="\n"
        )

    @classmethod
    def load(cls, path) -> "HandleMap":
        df = pd.read_csv(path, dtype={"node": np.int64, "handle": str}, keep_default_na=False)
        df = df.sort_values("node")
        if df["node"].tolist() != list(range(len(df))):
            raise ParseError(f"用户名映射文件的节点编号不连续: {path}")
        handles = cls(df["handle"].tolist())
        if len(handles) != len(df):
            raise ParseError(f"用户名映射文件包含重复用户名: {path}")
        return handles


# ============== 关注列表文件 ==============

@dataclass
class ListFileRecord:
    subject: str
    direction: str  # "in" 或 "out"
    neighbors: List[str]
    line_no: int


def read_list_records(path) -> List[ListFileRecord]:
    """逐行解析列表文件：`in <handle>: h1 h2 ...` 或 `out <handle>: h1 h2 ...`，# 开始注释"""
    records = []
    seen: Dict[Tuple[str, str], int] = {}
    with Path(path).open("r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = LIST_LINE.match(line)
            if m is None:
                raise ParseError(f"无法解析: {raw.rstrip()}", line_no)
            direction, subject = m.group(1), normalize_handle(m.group(2))
            neighbors = [normalize_handle(h) for h in m.group(3).split()]
            if len(set(neighbors)) != len(neighbors):
                raise ParseError(f"{direction} {subject} 的列表包含重复用户", line_no)
            if subject in neighbors:
                raise ParseError(f"{direction} {subject} 的列表包含自身", line_no)
            key = (direction, subject)
            if key in seen:
                raise ParseError(f"{direction} {subject} 重复出现（首次在第 {seen[key]} 行）", line_no)
            seen[key] = line_no
            records.append(ListFileRecord(subject, direction, neighbors, line_no))
    return records


def _synthesize_order(edge_count: int, chains: List[List[int]]) -> Tuple[List[int], bool]:
    """把各列表给出的局部顺序合并成全序；存在矛盾时退回首次出现顺序"""
    constraints = nx.DiGraph()
    constraints.add_nodes_from(range(edge_count))
    for chain in chains:
        constraints.add_edges_from(zip(chain, chain[1:]))
    if nx.is_directed_acyclic_graph(constraints):
        return list(nx.lexicographical_topological_sort(constraints)), True
    return list(range(edge_count)), False


def parse_list_file(path, handles: Optional[HandleMap] = None) -> Tuple[TemporalDigraph, HandleMap]:
    """由关注列表构造图

    in_list/out_list 复现文件中的顺序；seq 为合成值。只出现在一侧列表里的边保留，
    其闭包状态在缺少对应列表时无法判定（见 TemporalDigraph.is_determinable）。
    """
    records = read_list_records(path)
    handles = handles if handles is not None else HandleMap()
    for rec in records:
        handles.add(rec.subject)
        for h in rec.neighbors:
            handles.add(h)

    edge_ids: Dict[Tuple[int, int], int] = {}
    edges: List[Tuple[int, int]] = []
    chains: List[List[int]] = []
    out_records: Dict[int, ListFileRecord] = {}
    in_records: Dict[int, ListFileRecord] = {}
    for rec in records:
        subject = handles.to_id(rec.subject)
        chain = []
        for h in rec.neighbors:
            other = handles.to_id(h)
            pair = (other, subject) if rec.direction == "in" else (subject, other)
            if pair not in edge_ids:
                edge_ids[pair] = len(edges)
                edges.append(pair)
            chain.append(edge_ids[pair])
        chains.append(chain)
        (in_records if rec.direction == "in" else out_records)[subject] = rec

    # 两侧都有列表时，边必须同时出现在两侧
    neighbor_sets = {id(rec): set(rec.neighbors) for rec in records}
    for src, dst in edges:
        out_rec = out_records.get(src)
        if out_rec is not None and handles.handle(dst) not in neighbor_sets[id(out_rec)]:
            raise ParseError(
                f"{handles.handle(dst)} 的关注者列表包含 {handles.handle(src)}，但 out {handles.handle(src)} 中没有它",
                out_rec.line_no,
            )
        in_rec = in_records.get(dst)
        if in_rec is not None and handles.handle(src) not in neighbor_sets[id(in_rec)]:
            raise ParseError(
                f"out {handles.handle(src)} 包含 {handles.handle(dst)}，但 in {handles.handle(dst)} 中没有它",
                in_rec.line_no,
            )

    order, consistent = _synthesize_order(len(edges), chains)
    if not consistent:
        logger.warning(f"列表顺序无法合并为全序，seq 按首次出现顺序合成: {path}")

    g = TemporalDigraph(len(handles))
    for i in order:
        g.append_edge(*edges[i])
    g.reorder_adjacency(
        {v: [handles.to_id(h) for h in rec.neighbors] for v, rec in out_records.items()},
        {v: [handles.to_id(h) for h in rec.neighbors] for v, rec in in_records.items()},
    )
    g.in_known = set(in_records)
    g.out_known = set(out_records)
    logger.info(
        f"读取列表文件 {path}: {g.node_count} 个用户, {g.edge_count} 条边, "
        f"{len(in_records)} 个 in 列表, {len(out_records)} 个 out 列表"
    )
    return g, handles


def emit_list_file(g: TemporalDigraph, path, handles: Optional[HandleMap] = None):
    """写出列表文件；列表数据只写出原本已知的列表"""
    handles = handles if handles is not None else HandleMap.numbered(g.node_count)
    lines = []
    in_deg, out_deg = g.in_degrees(), g.out_degrees()
    for v in range(g.node_count):
        name = handles.handle(v)
        if in_deg[v] and (g.in_known is None or v in g.in_known):
            lines.append(f"in {name}: " + " ".join(handles.handle(x) for x in g.in_list(v)))
        if out_deg[v] and (g.out_known is None or v in g.out_known):
            lines.append(f"out {name}: " + " ".join(handles.handle(x) for x in g.out_list(v)))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


# ============== 边表 CSV ==============

def node_sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".nodes.csv")


def write_csv(df: pd.DataFrame, path, header_lines: Iterable[str] = ()):
    """写 CSV，前面加上 `# ` 开头的注释行"""
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        df.to_csv(f, index=False, lineterminator="\n")


def read_csv(path, **kwargs) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip", **kwargs)


def emit_edge_csv(g: TemporalDigraph, path, header_lines: Iterable[str] = ()):
    """写出边表；community/fitness 列为源节点属性，完整的节点属性写入 .nodes.csv"""
    src, dst = g.edge_arrays()
    df = pd.DataFrame({"src": src, "dst": dst, "seq": np.arange(len(src), dtype=np.int64)})
    nodes = pd.DataFrame({"node": np.arange(g.node_count, dtype=np.int64)})
    if g.communities is not None:
        communities = np.asarray(g.communities, dtype=np.int64)
        df["community"] = communities[df["src"].to_numpy()]
        nodes["community"] = communities
    if g.fitness is not None:
        fitness = np.asarray(g.fitness, dtype=np.float64)
        df["fitness"] = fitness[df["src"].to_numpy()]
        nodes["fitness"] = fitness
    header_lines = list(header_lines)
    write_csv(df, path, header_lines)
    sidecar = node_sidecar_path(path)
    if len(nodes.columns) > 1 or g.node_count != _implied_node_count(df):
        write_csv(nodes, sidecar, header_lines)
    elif sidecar.exists():
        sidecar.unlink()


def _implied_node_count(df: pd.DataFrame) -> int:
    if df.empty:
        return 0
    return int(max(df["src"].max(), df["dst"].max())) + 1


def parse_edge_csv(path) -> TemporalDigraph:
    """读取边表 CSV（表头 src,dst,seq[,community][,fitness]），若存在 .nodes.csv 则读取节点属性"""
    try:
        df = read_csv(path)
    except pd.errors.EmptyDataError:
        return TemporalDigraph(0)
    missing = [c for c in EDGE_COLUMNS if c not in df.columns]
    if missing:
        raise ParseError(f"边表缺少列: {', '.join(missing)}")
    for col in EDGE_COLUMNS:
        if len(df) and (df[col].isna().any() or not pd.api.types.is_integer_dtype(df[col])):
            raise ParseError(f"列 {col} 必须是整数")
    seq = df["seq"].to_numpy()
    duplicated = df["seq"].duplicated()
    if duplicated.any():
        row = int(np.nonzero(duplicated.to_numpy())[0][0])
        raise ParseError(f"seq 重复: {int(seq[row])}（数据第 {row + 1} 行）")
    if len(seq) and (seq.min() != 0 or seq.max() != len(seq) - 1):
        raise ParseError(f"seq 不连续: 应为 0..{len(seq) - 1}")
    loops = np.nonzero((df["src"] == df["dst"]).to_numpy())[0]
    if loops.size:
        row = int(loops[0])
        raise ParseError(f"自环: ({int(df['src'].iloc[row])}, {int(df['dst'].iloc[row])})（数据第 {row + 1} 行）")
    if len(df) and (df["src"].min() < 0 or df["dst"].min() < 0):
        raise ParseError("节点编号不能为负")
    df = df.sort_values("seq", kind="stable")

    node_count = _implied_node_count(df)
    communities = None
    fitness = None
    sidecar = node_sidecar_path(path)
    if sidecar.exists():
        nodes = read_csv(sidecar).sort_values("node")
        if nodes["node"].tolist() != list(range(len(nodes))) or len(nodes) < node_count:
            raise ParseError(f"节点属性文件与边表不一致: {sidecar}")
        node_count = len(nodes)
        if "community" in nodes.columns:
            communities = nodes["community"].astype(np.int64).tolist()
        if "fitness" in nodes.columns:
            fitness = nodes["fitness"].astype(np.float64).tolist()
    else:
        # 没有节点属性文件时，由边的源节点属性恢复；没有出边的节点无法恢复
        if "community" in df.columns:
            communities = [-1] * node_count
            for v, c in zip(df["src"], df["community"]):
                communities[int(v)] = int(c)
        if "fitness" in df.columns:
            fitness = [float("nan")] * node_count
            for v, f in zip(df["src"], df["fitness"]):
                fitness[int(v)] = float(f)
        if communities is not None and -1 in communities:
            logger.warning("部分节点没有出边，社区标签未知（记为 -1）")

    g = TemporalDigraph(node_count, communities=communities, fitness=fitness)
    for src, dst in zip(df["src"].tolist(), df["dst"].tolist()):
        g.append_edge(src, dst)
    logger.info(f"读取边表 {path}: {g.node_count} 个节点, {g.edge_count} 条边")
    return g


def load_graph(path, fmt: str = "csv", handles_path=None) -> Tuple[TemporalDigraph, Optional[HandleMap]]:
    """按格式读取图；列表文件会同时返回用户名映射"""
    if not Path(path).is_file():
        raise ParseError(f"输入文件不存在: {path}")
    if fmt == "lists":
        handles = HandleMap.load(handles_path) if handles_path else None
        return parse_list_file(path, handles)
    if fmt == "csv":
        return parse_edge_csv(path), None
    raise ParseError(f"未知的输入格式: {fmt}")
