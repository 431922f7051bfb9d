"""测试用的随机图构造和暴力对照实现"""

import numpy as np

from dclose.graph import TemporalDigraph


def random_temporal_graph(rng: np.random.Generator, n: int, density: float) -> TemporalDigraph:
    pairs = [(a, c) for a in range(n) for c in range(n) if a != c and rng.random() < density]
    order = rng.permutation(len(pairs))
    return TemporalDigraph.from_pairs(n, [pairs[i] for i in order])


def brute_force_flags(g: TemporalDigraph) -> np.ndarray:
    """对每条边扫描所有中间节点，只看 seq 更小的边"""
    seen = set()
    flags = []
    for src, dst, _ in g.iter_edges():
        flags.append(any((src, b) in seen and (b, dst) in seen for b in range(g.node_count)))
        seen.add((src, dst))
    return np.asarray(flags, dtype=bool)


def brute_force_k(g: TemporalDigraph, node: int, arrival: bool = False) -> dict:
    """follower -> k，直接按边的 seq 比较"""
    seqs = {(src, dst): seq for src, dst, seq in g.iter_edges()}
    out = {}
    for (a, c), a_c in seqs.items():
        if c != node:
            continue
        k = 0
        for b in range(g.node_count):
            a_b, b_c = seqs.get((a, b)), seqs.get((b, c))
            if a_b is None or b_c is None:
                continue
            if arrival and (a_b > a_c or b_c > a_c):
                continue
            k += 1
        out[a] = k
    return out


def brute_force_induced_edges(g: TemporalDigraph, center: int) -> list:
    """中心及其关注者之间的边，按原 seq 排列"""
    members = {center} | {src for src, dst, _ in g.iter_edges() if dst == center}
    return [(src, dst) for src, dst, _ in g.iter_edges() if src in members and dst in members]


def brute_force_spearman(xs, ys) -> float:
    def ranks(values):
        out = []
        for v in values:
            below = sum(1 for w in values if w < v)
            ties = sum(1 for w in values if w == v)
            out.append(below + (ties + 1) / 2)
        return out

    rx, ry = ranks(list(xs)), ranks(list(ys))
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / (vx * vy) ** 0.5


def write_lists(path, text: str):
    path.write_text(text, encoding="utf-8")
    return path
