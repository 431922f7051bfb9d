"""
服务状态管理模块
按模型参数缓存生成图和闭包标记，并跟踪正在运行的任务
"""

import json
import logging
import sys
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np


def get_project_root() -> Path:
    """获取项目根目录，支持打包和开发两种环境"""
    if getattr(sys, 'frozen', False):
        base_path = Path(sys.executable).parent
        if (base_path.parent / 'config.json').exists():
            return base_path.parent
        return base_path
    else:
        # 开发环境：scripts/server/ -> scripts -> project_root
        return Path(__file__).resolve().parents[2]


SCRIPT_DIR = get_project_root()
if str(SCRIPT_DIR) not in sys.path:
    sys.path.insert(0, str(SCRIPT_DIR))

from dclose.closure import detect_closure
from dclose.config import load_config
from dclose.models import GrowthTrace, generate
from dclose.schemas import ModelParams

logger = logging.getLogger(__name__)


class ServiceState:
    """服务状态管理类"""

    def __init__(self, cache_size: Optional[int] = None):
        self._graphs: "OrderedDict[str, Tuple[GrowthTrace, np.ndarray]]" = OrderedDict()
        self._cache_lock = threading.Lock()
        # 每个参数组合一把锁，避免同一张图被并发生成两次
        self._build_locks: Dict[str, threading.Lock] = {}
        self._running_lock = threading.Lock()
        self.running: Dict[str, int] = {"experiments": 0, "randtests": 0}
        self._config = None
        self._cache_size = cache_size
        self.results_dir = SCRIPT_DIR / "results"

    def _load_config(self) -> dict:
        if self._config is None:
            self._config = load_config()
        return self._config

    def reload_config(self):
        self._config = None

    @property
    def cache_size(self) -> int:
        if self._cache_size is None:
            return int(self._load_config().get("service", {}).get("cache_size", 8))
        return self._cache_size

    @staticmethod
    def cache_key(params: ModelParams) -> str:
        return json.dumps(params.model_dump(mode="json"), sort_keys=True)

    def cached_keys(self):
        with self._cache_lock:
            return list(self._graphs.keys())

    def get_graph(self, params: ModelParams) -> Tuple[GrowthTrace, np.ndarray]:
        """返回 (生成结果, 闭包标记)，命中缓存时不重新生成"""
        key = self.cache_key(params)

        # 快速路径
        with self._cache_lock:
            if key in self._graphs:
                self._graphs.move_to_end(key)
                return self._graphs[key]
            build_lock = self._build_locks.setdefault(key, threading.Lock())

        with build_lock:
            with self._cache_lock:
                if key in self._graphs:
                    return self._graphs[key]
            logger.info(f"生成图: {key}")
            trace = generate(params, np.random.default_rng(params.seed))
            flags = detect_closure(trace.graph)
            with self._cache_lock:
                self._graphs[key] = (trace, flags)
                while len(self._graphs) > self.cache_size:
                    evicted, _ = self._graphs.popitem(last=False)
                    self._build_locks.pop(evicted, None)
                    logger.info(f"缓存已满，移除: {evicted}")
            return trace, flags

    def clear_cache(self):
        with self._cache_lock:
            self._graphs.clear()
            self._build_locks.clear()

    def task_started(self, kind: str):
        with self._running_lock:
            self.running[kind] = self.running.get(kind, 0) + 1

    def task_finished(self, kind: str):
        with self._running_lock:
            self.running[kind] = max(0, self.running.get(kind, 0) - 1)


# 全局状态实例
STATE = ServiceState()
