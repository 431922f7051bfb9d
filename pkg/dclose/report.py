"""
实验报告模块
按配置生成或读取图，运行各项分析，写出带配置注释头的 CSV 和 summary.json
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from dclose.baseline import ordering_baseline, rand_test, spawn_generators
from dclose.closure import (
    all_follower_indegree_sums,
    closure_profiles,
    detect_closure,
    final_ratios,
    select_celebrities,
    stabilization_index,
    undeterminable_edges,
)
from dclose.errors import ConfigError, GraphError
from dclose.graph import TemporalDigraph
from dclose.heuristic import approx_final_ratios, heuristic_trace
from dclose.io import HandleMap, load_graph, write_csv
from dclose.models import GrowthTrace, generate
from dclose.schemas import ExperimentConfig
from dclose.stats import correlate_or_nan, degree_summary, mae

logger = logging.getLogger(__name__)

K_MODE_NOTE = {
    "final": "k 按数据末尾的关注关系统计",
    "arrival": "k 只统计 A->C 到达时 A 已关注、且已关注 C 的关注者",
}

# 相关分析的自变量列
CORRELATION_COLUMNS = {
    "in_degree": "in_degree",
    "follower_sum": "follower_indegree_sum",
    "same_community_sum": "same_community_sum",
}


@dataclass
class CorrelationReport:
    """top 切片上的逐节点表，以及 final_ratio 与各变量的 Pearson/Spearman 系数"""
    table: pd.DataFrame
    coefficients: Dict[str, Dict[str, float]]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"variable": var, "method": method, "coefficient": value, "n": len(self.table)}
            for var, by_method in self.coefficients.items()
            for method, value in by_method.items()
        ]
        return pd.DataFrame(rows, columns=["variable", "method", "coefficient", "n"])


@dataclass
class ReportBundle:
    out_dir: Path
    files: Dict[str, Path] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


# ============== 准备 ==============

def config_header(config: ExperimentConfig) -> List[str]:
    """CSV 注释头：完整配置回显（不含输出目录）与参数说明"""
    echo = config.model_dump(mode="json", exclude={"out_dir"})
    lines = [
        "dclose report",
        "config: " + json.dumps(echo, sort_keys=True, ensure_ascii=False),
    ]
    if config.model is not None:
        lines.append(f"alpha_note: {config.model.alpha_note}")
    lines.append(f"k_mode: {config.analysis.k_mode} ({K_MODE_NOTE[config.analysis.k_mode]})")
    return lines


def resolve_graph(config: ExperimentConfig) -> Tuple[TemporalDigraph, Optional[GrowthTrace], Optional[HandleMap]]:
    """读取输入图，或按模型参数生成；给了模型参数的边表视为该模型的生成结果"""
    if config.input_path is not None:
        g, handles = load_graph(config.input_path, config.input_format, config.handles_path)
        trace = GrowthTrace(g, config.model) if config.model is not None else None
        return g, trace, handles
    trace = generate(config.model, np.random.default_rng(config.model.seed))
    return trace.graph, trace, None


def check_config_against_graph(config: ExperimentConfig, g: TemporalDigraph):
    """在任何计算之前拒绝与图不相容的配置"""
    if config.analysis.community_analysis and not g.has_communities:
        raise ConfigError("社区分析需要带社区标签的图")
    if "approx" in config.analyses and g.seq_synthetic:
        raise ConfigError("approx 分析需要生成模型的图，列表数据不适用")
    bad = [v for v in config.analysis.randtest_nodes if not 0 <= v < g.node_count]
    if bad:
        raise ConfigError(f"randtest_nodes 包含不存在的节点: {bad}")


def randtest_targets(config: ExperimentConfig, g: TemporalDigraph) -> List[int]:
    """显式指定的节点；否则列表数据取 μ-celebrity，其余（或没有 μ-celebrity 时）取入度最高的节点"""
    if config.analysis.randtest_nodes:
        return list(config.analysis.randtest_nodes)
    if config.input_path is not None:
        celebrities = select_celebrities(g, config.celebrity.min_in, config.celebrity.max_in)
        if celebrities:
            return celebrities
    return g.top_by_in_degree(1) if g.node_count else []


# ============== 各项分析 ==============

def trajectory_frame(g: TemporalDigraph, flags: np.ndarray, nodes: List[int], workers: int = 1) -> pd.DataFrame:
    """长表：node, in_degree, arrival（1 起）, ratio"""
    frames = []
    for profile in closure_profiles(g, flags, nodes, workers=workers):
        n = len(profile.trajectory)
        frames.append(pd.DataFrame({
            "node": np.full(n, profile.node, dtype=np.int64),
            "in_degree": np.full(n, profile.in_degree, dtype=np.int64),
            "arrival": np.arange(1, n + 1, dtype=np.int64),
            "ratio": profile.trajectory,
        }))
    if not frames:
        return pd.DataFrame(columns=["node", "in_degree", "arrival", "ratio"])
    return pd.concat(frames, ignore_index=True)


def profile_frame(
    g: TemporalDigraph,
    flags: np.ndarray,
    handles: Optional[HandleMap] = None,
) -> pd.DataFrame:
    """所有节点的画像；rank 为按入度降序（同入度编号小者优先）的名次，从 0 开始"""
    n = g.node_count
    in_degrees = g.in_degrees()
    rank = np.empty(n, dtype=np.int64)
    rank[np.asarray(g.top_by_in_degree(n), dtype=np.int64)] = np.arange(n, dtype=np.int64)
    total, same = all_follower_indegree_sums(g, same_community=g.has_communities)

    df = pd.DataFrame({
        "node": np.arange(n, dtype=np.int64),
        "rank": rank,
        "in_degree": in_degrees,
        "final_ratio": final_ratios(g, flags),
        "follower_indegree_sum": total,
    })
    if same is not None:
        df["same_community_sum"] = same
        df["community"] = np.asarray(g.communities, dtype=np.int64)
    if g.fitness is not None:
        df["fitness"] = np.asarray(g.fitness, dtype=np.float64)
    if handles is not None:
        df["handle"] = [handles.handle(v) for v in range(n)]
    return df


def top_slice(df: pd.DataFrame, top: int) -> pd.DataFrame:
    return df.sort_values("rank", kind="stable").head(top).reset_index(drop=True)


def correlation_report(profiles: pd.DataFrame, top: int) -> CorrelationReport:
    table = top_slice(profiles, top)
    table = table[[c for c in ("node", "rank", "in_degree", "final_ratio",
                               "follower_indegree_sum", "same_community_sum") if c in table.columns]]
    coefficients: Dict[str, Dict[str, float]] = {}
    for var, column in CORRELATION_COLUMNS.items():
        if column not in table.columns:
            continue
        coefficients[var] = {
            method: correlate_or_nan(table["final_ratio"], table[column], method)
            for method in ("pearson", "spearman")
        }
    return CorrelationReport(table=table, coefficients=coefficients)


def approx_frame(trace: GrowthTrace, flags: np.ndarray) -> pd.DataFrame:
    g = trace.graph
    n = g.node_count
    measured = final_ratios(g, flags)
    approx = approx_final_ratios(trace)
    rank = np.empty(n, dtype=np.int64)
    rank[np.asarray(g.top_by_in_degree(n), dtype=np.int64)] = np.arange(n, dtype=np.int64)
    return pd.DataFrame({
        "node": np.arange(n, dtype=np.int64),
        "rank": rank,
        "in_degree": g.in_degrees(),
        "measured": measured,
        "approx": approx,
        "abs_error": np.abs(measured - approx),
    })


def heuristic_trace_frame(trace: GrowthTrace, nodes: List[int], steps: int) -> pd.DataFrame:
    rows = [
        {"node": node, "t": p.t, "in_degree": p.in_degree, "s": p.s, "c": p.c}
        for node in nodes
        for p in heuristic_trace(trace, node, steps=steps)
    ]
    return pd.DataFrame(rows, columns=["node", "t", "in_degree", "s", "c"])


def randtest_frames(
    g: TemporalDigraph,
    flags: np.ndarray,
    nodes: List[int],
    config: ExperimentConfig,
    exclude=None,
) -> Tuple[pd.DataFrame, pd.DataFrame, List[dict]]:
    """每个节点一份随机化检验和一份排列基线；随机源按节点派生，与 workers 无关"""
    opts = config.analysis
    children = spawn_generators(np.random.default_rng(config.seed), 2 * len(nodes))
    rows = []
    ordering_rows = []
    summaries = []
    for i, node in enumerate(nodes):
        report = rand_test(
            g, flags, node,
            runs=opts.runs, rng=children[2 * i], k_mode=opts.k_mode,
            exclude=exclude, workers=opts.workers,
        )
        for row in report.rows:
            rows.append({
                "node": node,
                "k": row.k,
                "size": row.size,
                "observed": row.observed,
                "baseline_mean": row.baseline.mean,
                "baseline_min": row.baseline.min,
                "baseline_max": row.baseline.max,
                "runs": row.baseline.runs,
                "above_max": row.above_max,
                "within": row.within,
            })
        ob = ordering_baseline(g, flags, node, runs=opts.runs, rng=children[2 * i + 1], workers=opts.workers)
        ordering_rows.append({
            "node": node, "in_degree": ob.in_degree, "observed": ob.observed,
            "runs": ob.runs, "mean": ob.mean, "min": ob.min, "max": ob.max,
        })
        summaries.append({"node": node, "rows": len(report.rows), "crossover_K": report.crossover_label})
    randtest_df = pd.DataFrame(rows, columns=[
        "node", "k", "size", "observed", "baseline_mean", "baseline_min", "baseline_max",
        "runs", "above_max", "within",
    ])
    ordering_df = pd.DataFrame(ordering_rows, columns=["node", "in_degree", "observed", "runs", "mean", "min", "max"])
    return randtest_df, ordering_df, summaries


# ============== 主流程 ==============

def _float(value: float) -> Optional[float]:
    """summary.json 中的 NaN/inf 记为 null"""
    return float(value) if np.isfinite(value) else None


def run_experiment(config: ExperimentConfig) -> ReportBundle:
    """运行 config.analyses 中的各项分析，结果写入 config.out_dir"""
    g, trace, handles = resolve_graph(config)
    check_config_against_graph(config, g)
    before = g.fingerprint()

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ReportBundle(out_dir=out_dir)
    header = config_header(config)
    opts = config.analysis

    def emit(name: str, df: pd.DataFrame):
        path = out_dir / name
        write_csv(df, path, header)
        bundle.files[name] = path
        logger.info(f"写出 {path} ({len(df)} 行)")

    flags = detect_closure(g)
    exclude = undeterminable_edges(g) if opts.exclude_undeterminable else None
    summary: dict = {
        "header": header,
        "graph": {"nodes": g.node_count, "edges": g.edge_count, "fingerprint": before},
        "closed_edges": int(np.count_nonzero(flags)),
    }
    if exclude is not None:
        summary["excluded_edges"] = len(exclude)

    profiles = profile_frame(g, flags, handles)
    summary["degree_summary"] = {
        k: (_float(v) if isinstance(v, float) else v)
        for k, v in degree_summary(profiles["in_degree"].to_numpy(), profiles["final_ratio"].to_numpy()).items()
    }

    if "trajectory" in config.analyses:
        top = g.top_by_in_degree(opts.top_m)
        traj = trajectory_frame(g, flags, top, workers=opts.workers)
        emit("trajectory.csv", traj)
        summary["stabilization"] = [
            {
                "node": node,
                "in_degree": g.in_degree(node),
                "final_ratio": float(group["ratio"].iloc[-1]) if len(group) else 0.0,
                "index": stabilization_index(group["ratio"].to_numpy(), opts.stabilization_tolerance),
            }
            for node, group in ((v, traj[traj["node"] == v]) for v in top)
        ]

    if "profile" in config.analyses:
        emit("profiles.csv", profiles)

    if "correlation" in config.analyses:
        corr = correlation_report(profiles, opts.corr_top)
        emit("correlation_nodes.csv", corr.table)
        emit("correlation.csv", corr.to_frame())
        summary["correlation"] = {
            var: {m: _float(v) for m, v in by_method.items()}
            for var, by_method in corr.coefficients.items()
        }

    if "randtest" in config.analyses:
        nodes = randtest_targets(config, g)
        randtest_df, ordering_df, rt_summaries = randtest_frames(g, flags, nodes, config, exclude)
        emit("randtest.csv", randtest_df)
        emit("ordering.csv", ordering_df)
        summary["randtest"] = rt_summaries

    if "approx" in config.analyses:
        if trace is None:
            raise ConfigError("approx 分析需要模型参数")
        approx = approx_frame(trace, flags)
        emit("heuristic.csv", approx)
        top = top_slice(approx, opts.corr_top)
        summary["approx"] = {
            "top": len(top),
            "mae_top": mae(top["measured"], top["approx"]),
            "mae_all": mae(approx["measured"], approx["approx"]) if len(approx) else None,
        }
        if opts.heuristic_trace:
            emit("heuristic_trace.csv", heuristic_trace_frame(trace, g.top_by_in_degree(opts.top_m), opts.trace_steps))

    if handles is not None:
        handles.save(out_dir / "handles.csv")
        bundle.files["handles.csv"] = out_dir / "handles.csv"

    after = g.fingerprint()
    if after != before:
        raise GraphError("分析过程中输入图被修改")

    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(summary, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    bundle.files["summary.json"] = summary_path
    bundle.summary = summary
    logger.info(f"实验完成: {len(bundle.files)} 个文件写入 {out_dir}")
    return bundle
