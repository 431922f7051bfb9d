"""
统计工具模块
相关系数、平均绝对误差和入度分布摘要
"""

from typing import Dict, Sequence

import numpy as np
from scipy.stats import rankdata

from dclose.errors import StatisticsError

METHODS = ("pearson", "spearman")


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise StatisticsError("常数序列的 Pearson 相关系数无定义")
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return min(1.0, max(-1.0, r))


def correlate(xs: Sequence[float], ys: Sequence[float], method: str = "pearson") -> float:
    """Pearson 或 Spearman（秩上的 Pearson，并列取平均秩）相关系数"""
    if method not in METHODS:
        raise StatisticsError(f"未知的相关方法: {method}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatisticsError(f"序列长度不一致: {x.shape} vs {y.shape}")
    if len(x) < 3:
        raise StatisticsError(f"至少需要 3 个点，当前 {len(x)}")
    if method == "spearman":
        x = rankdata(x, method="average")
        y = rankdata(y, method="average")
    return _pearson(x, y)


def correlate_or_nan(xs, ys, method: str) -> float:
    """报告用：无定义时返回 NaN 而不是报错"""
    try:
        return correlate(xs, ys, method)
    except StatisticsError:
        return float("nan")


def mae(measured: Sequence[float], approx: Sequence[float]) -> float:
    a = np.asarray(measured, dtype=float)
    b = np.asarray(approx, dtype=float)
    if a.shape != b.shape:
        raise StatisticsError("序列长度不一致")
    if a.size == 0:
        raise StatisticsError("空序列")
    return float(np.mean(np.abs(a - b)))


def degree_summary(in_degrees: np.ndarray, ratios: np.ndarray, threshold: float = 0.1) -> Dict[str, float]:
    """入度分布与闭包比例的摘要：最大/中位入度及其比值、闭包比例中位数、比例 > threshold 的节点占比"""
    in_degrees = np.asarray(in_degrees)
    ratios = np.asarray(ratios, dtype=float)
    median_in = float(np.median(in_degrees)) if in_degrees.size else 0.0
    max_in = float(in_degrees.max()) if in_degrees.size else 0.0
    return {
        "nodes": int(in_degrees.size),
        "max_in_degree": max_in,
        "median_in_degree": median_in,
        "max_over_median": max_in / median_in if median_in > 0 else float("inf"),
        "median_ratio": float(np.median(ratios)) if ratios.size else 0.0,
        "share_ratio_above": float(np.mean(ratios > threshold)) if ratios.size else 0.0,
        "ratio_threshold": threshold,
    }
