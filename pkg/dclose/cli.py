"""
命令行入口
子命令: generate / ingest / analyze / randtest / approx / report
出错时向 stderr 写一行 JSON 并以非零码退出
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from dclose.closure import detect_closure, final_ratios, select_celebrities
from dclose.config import load_config
from dclose.errors import ConfigError, DcloseError
from dclose.io import HandleMap, emit_edge_csv, emit_list_file, load_graph, write_csv
from dclose.logging_config import setup_logging
from dclose.models import generate
from dclose.report import config_header, run_experiment
from dclose.schemas import ModelKind, parse_experiment_config, parse_model_params

logger = logging.getLogger(__name__)

EXIT_ERROR = 2
EXIT_INTERNAL = 1


# ============== 参数 ==============

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="随机种子，覆盖配置文件")
    common.add_argument("--out-dir", default="out", help="输出目录（默认 out）")
    common.add_argument("--format", default="csv", choices=["csv", "lists"], help="输出格式")
    common.add_argument("--config", type=Path, help="配置文件路径（默认项目根目录的 config.json）")
    common.add_argument("--log-level", help="日志级别，覆盖配置文件")
    return common


def _add_model_args(p: argparse.ArgumentParser):
    p.add_argument("--kind", choices=[k.value for k in ModelKind])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("-D", "--D", dest="D", type=int, help="每个新节点的出边数")
    p.add_argument("-N", "--N", dest="N", type=int, help="节点数")
    p.add_argument("-C", "--C", dest="C", type=int, help="社区数")


def _add_input_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--input", required=required, help="输入图（边表 CSV 或关注列表文件）")
    p.add_argument("--input-format", default="csv", choices=["csv", "lists"])
    p.add_argument("--handles", help="预先存在的用户名映射 CSV（列表输入时使用）")


def _add_analysis_args(p: argparse.ArgumentParser):
    p.add_argument("--top-m", type=int)
    p.add_argument("--corr-top", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--k-mode", choices=["final", "arrival"])
    p.add_argument("--exclude-undeterminable", action="store_true", default=None)
    p.add_argument("--community-analysis", action="store_true", default=None)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dclose", description="有向闭包分析工具")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    p = sub.add_parser("generate", parents=[common], help="按生成模型生成时序图")
    _add_model_args(p)

    p = sub.add_parser("ingest", parents=[common], help="读取关注列表或边表，转换为边表 CSV")
    _add_input_args(p)
    p.add_argument("--min-in", type=int, help="μ-celebrity 入度下限")
    p.add_argument("--max-in", type=int, help="μ-celebrity 入度上限")

    p = sub.add_parser("analyze", parents=[common], help="闭包轨迹、节点画像和相关分析")
    _add_input_args(p, required=False)
    _add_model_args(p)
    _add_analysis_args(p)

    p = sub.add_parser("randtest", parents=[common], help="k-linked 随机化检验与排列基线")
    _add_input_args(p, required=False)
    _add_model_args(p)
    _add_analysis_args(p)
    p.add_argument("--node", type=int, action="append", help="检验的节点，可重复；默认自动选择")
    p.add_argument("--min-in", type=int)
    p.add_argument("--max-in", type=int)

    p = sub.add_parser("approx", parents=[common], help="启发式 C_{N-1}(j) 与实测闭包比例的对比")
    _add_input_args(p, required=False)
    _add_model_args(p)
    _add_analysis_args(p)
    p.add_argument("--trace", action="store_true", help="同时输出 top-m 节点的逐步 S_t/C_t")
    p.add_argument("--trace-steps", type=int)

    p = sub.add_parser("report", parents=[common], help="运行全部分析")
    _add_input_args(p, required=False)
    _add_model_args(p)
    _add_analysis_args(p)
    p.add_argument("--node", type=int, action="append")
    p.add_argument("--trace", action="store_true")
    return parser


# ============== 配置组装 ==============

def _pick(args: argparse.Namespace, *names: str) -> dict:
    return {name: getattr(args, name, None) for name in names if getattr(args, name, None) is not None}


def model_dict(args: argparse.Namespace, config: dict) -> dict:
    model = dict(config["model"])
    model.update(_pick(args, "kind", "alpha", "beta", "D", "N", "C"))
    if args.seed is not None:
        model["seed"] = args.seed
    return model


def _has_model_args(args: argparse.Namespace) -> bool:
    return bool(_pick(args, "kind", "alpha", "beta", "D", "N", "C"))


def experiment_from_args(args: argparse.Namespace, config: dict, analyses: List[str]) -> dict:
    analysis = dict(config["analysis"])
    analysis.update(_pick(args, "top_m", "corr_top", "runs", "k_mode", "exclude_undeterminable",
                          "community_analysis", "workers", "trace_steps"))
    if getattr(args, "node", None):
        analysis["randtest_nodes"] = args.node
    if getattr(args, "trace", False):
        analysis["heuristic_trace"] = True
    celebrity = dict(config["celebrity"])
    celebrity.update(_pick(args, "min_in", "max_in"))

    data = {
        "analyses": analyses,
        "out_dir": args.out_dir,
        "seed": args.seed if args.seed is not None else config["model"]["seed"],
        "analysis": analysis,
        "celebrity": celebrity,
    }
    if args.input:
        data["input_path"] = args.input
        data["input_format"] = args.input_format
        data["handles_path"] = args.handles
        # 边表搭配显式模型参数或 approx 时，参数描述该生成图
        if args.input_format == "csv" and (_has_model_args(args) or "approx" in analyses):
            data["model"] = model_dict(args, config)
    else:
        data["model"] = model_dict(args, config)
    return data


# ============== 子命令 ==============

def _print(payload: dict):
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True))


def cmd_generate(args, config: dict) -> dict:
    params = parse_model_params(model_dict(args, config))
    trace = generate(params, np.random.default_rng(params.seed))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = [
        "dclose generate",
        "model: " + json.dumps(params.model_dump(mode="json"), sort_keys=True),
        f"alpha_note: {params.alpha_note}",
    ]
    if args.format == "lists":
        path = out_dir / "graph.lists"
        handles = HandleMap.numbered(trace.graph.node_count)
        emit_list_file(trace.graph, path, handles)
        handles.save(out_dir / "handles.csv")
    else:
        path = out_dir / "graph.csv"
        emit_edge_csv(trace.graph, path, header)
    return {"command": "generate", "path": str(path), "nodes": trace.graph.node_count, "edges": trace.graph.edge_count}


def cmd_ingest(args, config: dict) -> dict:
    g, handles = load_graph(args.input, args.input_format, args.handles)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["dclose ingest", f"source: {args.input} ({args.input_format})"]
    if g.seq_synthetic:
        header.append("seq: 由列表顺序合成，不是真实时间戳")
    if args.format == "lists":
        path = out_dir / "graph.lists"
        emit_list_file(g, path, handles)
    else:
        path = out_dir / "graph.csv"
        emit_edge_csv(g, path, header)
    if handles is not None:
        handles.save(out_dir / "handles.csv")

    bounds = dict(config["celebrity"])
    bounds.update(_pick(args, "min_in", "max_in"))
    celebrities = select_celebrities(g, bounds["min_in"], bounds["max_in"])
    ratios = final_ratios(g, detect_closure(g))
    df = pd.DataFrame({
        "node": np.asarray(celebrities, dtype=np.int64),
        "in_degree": np.asarray([g.in_degree(v) for v in celebrities], dtype=np.int64),
        "final_ratio": ratios[np.asarray(celebrities, dtype=np.int64)] if celebrities else np.zeros(0),
    })
    if handles is not None:
        df["handle"] = [handles.handle(v) for v in celebrities]
    write_csv(df, out_dir / "celebrities.csv", header + [f"celebrity: {bounds}"])
    return {
        "command": "ingest", "path": str(path), "nodes": g.node_count, "edges": g.edge_count,
        "celebrities": len(celebrities),
    }


ANALYSES_BY_COMMAND = {
    "analyze": ["trajectory", "profile", "correlation"],
    "randtest": ["randtest"],
    "approx": ["approx"],
    "report": ["trajectory", "profile", "randtest", "approx", "correlation"],
}


def cmd_experiment(args, config: dict) -> dict:
    analyses = list(ANALYSES_BY_COMMAND[args.command])
    # 列表数据没有生成模型，report 跳过 approx
    if args.command == "report" and args.input and args.input_format == "lists":
        analyses.remove("approx")
    if args.command == "report" and args.input and args.input_format == "csv" and not _has_model_args(args):
        analyses.remove("approx")
    experiment = parse_experiment_config(experiment_from_args(args, config, analyses))
    logger.debug("\n".join(config_header(experiment)))
    bundle = run_experiment(experiment)
    return {
        "command": args.command,
        "out_dir": str(bundle.out_dir),
        "files": sorted(bundle.files),
    }


COMMANDS = {
    "generate": cmd_generate,
    "ingest": cmd_ingest,
    "analyze": cmd_experiment,
    "randtest": cmd_experiment,
    "approx": cmd_experiment,
    "report": cmd_experiment,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None and not args.config.exists():
            raise ConfigError(f"配置文件不存在: {args.config}")
        try:
            config = load_config(args.config)
        except json.JSONDecodeError as e:
            raise ConfigError(f"配置文件不是合法 JSON: {e}") from e
        setup_logging(args.log_level or config["logging"]["level"])
        if args.format == "lists" and args.command not in ("generate", "ingest"):
            raise ConfigError("报告只支持 --format csv")
        _print(COMMANDS[args.command](args, config))
        return 0
    except DcloseError as e:
        logger.debug(f"{args.command} 失败", exc_info=True)
        print(json.dumps(e.to_dict(), ensure_ascii=False), file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"{args.command} 出现未预期的错误")
        print(json.dumps({"error": "internal_error", "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return EXIT_INTERNAL
