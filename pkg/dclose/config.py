import copy
import json
import sys
from pathlib import Path
from typing import Optional


def get_config_path() -> Path:
    """获取配置文件路径，支持打包和开发两种环境"""
    if getattr(sys, 'frozen', False):
        # 打包后：优先工作目录，其次可执行文件所在目录
        cwd_config = Path.cwd() / "config.json"
        if cwd_config.exists():
            return cwd_config
        exe_config = Path(sys.executable).parent / "config.json"
        if exe_config.exists():
            return exe_config
        return cwd_config
    else:
        # 开发环境：dclose/ -> project_root
        return Path(__file__).resolve().parents[1] / "config.json"


CONFIG_PATH = get_config_path()

DEFAULT_CONFIG = {
    "model": {
        "kind": "pa",
        "alpha": 0.3,
        "beta": 0.8,
        "D": 10,
        "N": 10000,
        "C": 1,
        "seed": 1
    },
    "analysis": {
        "top_m": 10,
        "corr_top": 100,
        "runs": 100,
        "k_mode": "final",
        "exclude_undeterminable": False,
        "community_analysis": False,
        "heuristic_trace": False,
        "trace_steps": 50,
        "stabilization_tolerance": 0.02,
        "randtest_nodes": [],
        "workers": 1
    },
    "celebrity": {
        "min_in": 10000,
        "max_in": 50000
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8093,
        "cache_size": 8
    },
    "logging": {
        "level": "INFO"
    }
}


def merge_config(base, override):
    result = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = merge_config(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


def load_config(path: Optional[Path] = None):
    path = Path(path) if path is not None else CONFIG_PATH
    if not path.exists():
        return copy.deepcopy(DEFAULT_CONFIG)
    with path.open("r", encoding="utf-8") as f:
        raw = json.load(f)
    return merge_config(DEFAULT_CONFIG, raw)


def save_config(config, path: Optional[Path] = None):
    """保存配置到文件"""
    path = Path(path) if path is not None else CONFIG_PATH
    with path.open("w", encoding="utf-8") as f:
        json.dump(config, f, indent=2, ensure_ascii=False)
