import os
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录和 scripts 到路径
ROOT = Path(__file__).resolve().parents[1]
for p in (ROOT, ROOT / "scripts"):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

from dclose.graph import TemporalDigraph


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 桌面规模的模型复现，设置 DCLOSE_RUN_SLOW=1 时运行")


def pytest_collection_modifyitems(config, items):
    if os.getenv("DCLOSE_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="设置 DCLOSE_RUN_SLOW=1 运行")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def closed_triangle():
    """B->C, A->B, A->C：最后一条边闭合（A=0, B=1, C=2）"""
    return TemporalDigraph.from_pairs(3, [(1, 2), (0, 1), (0, 2)])


@pytest.fixture
def k3_star():
    """C=0, B1..B3=1..3, A=4；A 关注 C 和全部三个 B"""
    pairs = [(1, 0), (2, 0), (3, 0), (4, 1), (4, 2), (4, 3), (4, 0)]
    return TemporalDigraph.from_pairs(5, pairs)
