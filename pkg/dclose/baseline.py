"""
随机顺序基线模块
k-linked 星形网络在随机边顺序下的期望 f_k（蒙特卡洛 + 精确枚举），以及随机化检验报告
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np

from dclose.closure import k_linked_partition
from dclose.errors import EnumerationLimitError
from dclose.graph import TemporalDigraph

logger = logging.getLogger(__name__)

ENUMERATION_MAX_K = 4
EXACT_MAX_K = 6
# 每批生成的随机键数量上限，控制内存
_CHUNK_KEYS = 2_000_000


@dataclass(frozen=True)
class BaselineEstimate:
    """多次模拟得到的 f_k 基线：均值及最小/最大值误差棒"""
    k: int
    sample_size: int
    runs: int
    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class RandTestRow:
    k: int
    size: int
    observed: float
    baseline: BaselineEstimate

    @property
    def above_max(self) -> bool:
        return self.observed > self.baseline.max

    @property
    def within(self) -> bool:
        return self.baseline.min <= self.observed <= self.baseline.max


@dataclass
class RandTestReport:
    """单个节点的随机化检验结果

    crossover_K 为观测 f_k 第一次落入 [min, max] 的 k，从未落入时为 None（即 K = ∞）。
    """
    celebrity: int
    k_mode: str
    rows: List[RandTestRow] = field(default_factory=list)
    crossover_K: Optional[int] = None

    @property
    def crossover_label(self) -> str:
        return "inf" if self.crossover_K is None else str(self.crossover_K)


@dataclass(frozen=True)
class OrderingBaseline:
    """导出子图随机插入顺序下，指向中心节点的闭合边数"""
    node: int
    in_degree: int
    observed: int
    runs: int
    mean: float
    min: int
    max: int


# ============== 随机源 ==============

def spawn_generators(rng: np.random.Generator, count: int) -> List[np.random.Generator]:
    """从 rng 派生 count 个互相独立、可复现的子随机源"""
    entropy = int(rng.integers(0, 2**63))
    children = np.random.SeedSequence(entropy).spawn(count)
    return [np.random.default_rng(child) for child in children]


def _map_runs(fn, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


# ============== 星形网络 ==============

def _closed_from_keys(keys: np.ndarray, k: int) -> np.ndarray:
    """keys[:, 0] 为 A->C，keys[:, 1..k] 为 A->B_i，keys[:, k+1..2k] 为 B_i->C；键越小越早到达"""
    if k == 0:
        return np.zeros(keys.shape[0], dtype=bool)
    path_done = np.maximum(keys[:, 1:k + 1], keys[:, k + 1:2 * k + 1])
    return (path_done < keys[:, :1]).any(axis=1)


def star_trial(k: int, rng: np.random.Generator) -> bool:
    """随机排列 2k+1 条边一次，返回 A->C 是否闭合"""
    if k < 0:
        raise ValueError(f"k 不能为负: {k}")
    keys = rng.random((1, 2 * k + 1))
    return bool(_closed_from_keys(keys, k)[0])


def star_trials(k: int, size: int, rng: np.random.Generator) -> int:
    """size 次独立试验中 A->C 闭合的次数"""
    width = 2 * k + 1
    rows_per_chunk = max(1, _CHUNK_KEYS // width)
    hits = 0
    remaining = size
    while remaining > 0:
        rows = min(rows_per_chunk, remaining)
        hits += int(np.count_nonzero(_closed_from_keys(rng.random((rows, width)), k)))
        remaining -= rows
    return hits


def baseline_fk(
    k: int,
    sample_size: int,
    runs: int = 100,
    rng: Optional[np.random.Generator] = None,
    workers: int = 1,
) -> BaselineEstimate:
    """每次模拟抽 sample_size 个随机顺序，记录闭合比例；对 runs 次模拟取均值/最小/最大"""
    if sample_size < 1 or runs < 1:
        raise ValueError("sample_size 与 runs 必须 >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    generators = spawn_generators(rng, runs)
    fractions = _map_runs(lambda r: star_trials(k, sample_size, r) / sample_size, generators, workers)
    values = np.asarray(fractions, dtype=float)
    return BaselineEstimate(
        k=k,
        sample_size=sample_size,
        runs=runs,
        mean=float(values.mean()),
        min=float(values.min()),
        max=float(values.max()),
    )


def inclusion_exclusion_baseline(k: int) -> Fraction:
    """Σ_{j=1..k} (-1)^{j+1} C(k,j) / (2j+1)"""
    return sum(
        (Fraction((-1) ** (j + 1) * math.comb(k, j), 2 * j + 1) for j in range(1, k + 1)),
        Fraction(0),
    )


def enumerate_baseline(k: int) -> Fraction:
    """枚举 (2k+1)! 种顺序，统计 A->C 闭合的比例"""
    if k > ENUMERATION_MAX_K:
        raise EnumerationLimitError(f"k={k} 超出枚举上限 {ENUMERATION_MAX_K}")
    width = 2 * k + 1
    closed = 0
    total = 0
    for order in itertools.permutations(range(width)):
        # order[i] 为第 i 条边的到达位置
        ac = order[0]
        if any(max(order[i], order[k + i]) < ac for i in range(1, k + 1)):
            closed += 1
        total += 1
    return Fraction(closed, total)


def exact_baseline(k: int) -> Fraction:
    """随机顺序下 A->C 闭合的精确概率

    k <= 4 时枚举并与容斥公式交叉校验；k <= 6 时用容斥公式；更大的 k 请用蒙特卡洛。
    """
    if k < 0:
        raise ValueError(f"k 不能为负: {k}")
    if k > EXACT_MAX_K:
        raise EnumerationLimitError(f"k={k} 超出精确计算上限 {EXACT_MAX_K}，请改用 baseline_fk 蒙特卡洛估计")
    closed_form = inclusion_exclusion_baseline(k)
    if k <= ENUMERATION_MAX_K:
        enumerated = enumerate_baseline(k)
        if enumerated != closed_form:
            raise ArithmeticError(f"k={k} 枚举值 {enumerated} 与容斥公式 {closed_form} 不一致")
        return enumerated
    return closed_form


# ============== 随机化检验 ==============

def rand_test(
    g: TemporalDigraph,
    flags: np.ndarray,
    node: int,
    runs: int = 100,
    rng: Optional[np.random.Generator] = None,
    k_mode: str = "final",
    exclude: Optional[Iterable[int]] = None,
    min_size: int = 10,
    workers: int = 1,
) -> RandTestReport:
    """对 |S_k| > min_size 的每个 k，比较观测 f_k 与随机顺序基线"""
    rng = rng if rng is not None else np.random.default_rng()
    stats = [
        s for s in k_linked_partition(g, node, flags, k_mode=k_mode, exclude=exclude)
        if s.counted > min_size
    ]
    generators = spawn_generators(rng, len(stats))
    report = RandTestReport(celebrity=node, k_mode=k_mode)
    for stat, child in zip(stats, generators):
        estimate = baseline_fk(stat.k, stat.counted, runs=runs, rng=child, workers=workers)
        report.rows.append(RandTestRow(stat.k, stat.counted, stat.f_k, estimate))
        logger.debug(
            f"节点 {node} k={stat.k}: |S_k|={stat.counted}, f_k={stat.f_k:.4f}, "
            f"基线 {estimate.mean:.4f} [{estimate.min:.4f}, {estimate.max:.4f}]"
        )
    report.crossover_K = next((row.k for row in report.rows if row.within), None)
    logger.info(f"节点 {node} 随机化检验完成: {len(report.rows)} 行, K={report.crossover_label}")
    return report


def _count_center_closures(src: np.ndarray, dst: np.ndarray, order: np.ndarray, n: int, center: int) -> int:
    out_sets = [set() for _ in range(n)]
    in_sets = [set() for _ in range(n)]
    hits = 0
    for e in order:
        a, c = int(src[e]), int(dst[e])
        if c == center and not out_sets[a].isdisjoint(in_sets[c]):
            hits += 1
        out_sets[a].add(c)
        in_sets[c].add(a)
    return hits


def ordering_baseline(
    g: TemporalDigraph,
    flags: np.ndarray,
    node: int,
    runs: int = 100,
    rng: Optional[np.random.Generator] = None,
    workers: int = 1,
) -> OrderingBaseline:
    """把 {node} ∪ 关注者 的导出子图的边随机排列后插入，统计指向 node 的闭合边数"""
    rng = rng if rng is not None else np.random.default_rng()
    sub, mapping = g.induced_follower_subgraph(node)
    src, dst = sub.edge_arrays()
    observed = int(np.count_nonzero(flags[np.asarray(g.in_seqs(node), dtype=np.int64)]))
    center = mapping[node]

    def one_run(child: np.random.Generator) -> int:
        return _count_center_closures(src, dst, child.permutation(sub.edge_count), sub.node_count, center)

    counts = np.asarray(_map_runs(one_run, spawn_generators(rng, runs), workers), dtype=np.int64)
    return OrderingBaseline(
        node=node,
        in_degree=g.in_degree(node),
        observed=observed,
        runs=runs,
        mean=float(counts.mean()),
        min=int(counts.min()),
        max=int(counts.max()),
    )
