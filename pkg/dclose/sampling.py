"""
加权抽样模块
可增长的前缀和树（Fenwick 树），支持增量更新和 O(log n) 按权抽样
"""

from typing import List, Union

import numpy as np

Number = Union[int, float]


class WeightTree:
    """按权重抽样下标的 Fenwick 树

    权重为整数时（入度）求和是精确的；为浮点数时（入度 × fitness）
    可能有舍入误差，抽样时会避开权重为零的位置。
    """

    def __init__(self, weights=None):
        self._weights: List[Number] = []
        self._tree: List[Number] = [0]
        self._total: Number = 0
        for w in weights or ():
            self.append(w)

    def __len__(self) -> int:
        return len(self._weights)

    @property
    def total(self) -> Number:
        return self._total

    def weight(self, index: int) -> Number:
        return self._weights[index]

    def prefix(self, count: int) -> Number:
        """前 count 个位置的权重和"""
        s = 0
        tree = self._tree
        while count > 0:
            s += tree[count]
            count &= count - 1
        return s

    def append(self, weight: Number) -> int:
        if weight < 0:
            raise ValueError(f"权重不能为负: {weight}")
        index = len(self._weights)
        p = index + 1
        low = p & (-p)
        self._tree.append(weight + self.prefix(p - 1) - self.prefix(p - low))
        self._weights.append(weight)
        self._total += weight
        return index

    def add(self, index: int, delta: Number):
        new_weight = self._weights[index] + delta
        if new_weight < 0:
            raise ValueError(f"权重不能为负: {new_weight}")
        self._weights[index] = new_weight
        self._total += delta
        tree = self._tree
        n = len(self._weights)
        p = index + 1
        while p <= n:
            tree[p] += delta
            p += p & (-p)

    def find(self, u: Number) -> int:
        """满足 prefix(i + 1) > u 的最小 i"""
        n = len(self._weights)
        tree = self._tree
        pos = 0
        step = 1 << (n.bit_length() - 1) if n else 0
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] <= u:
                pos = nxt
                u -= tree[nxt]
            step >>= 1
        if pos >= n:
            pos = n - 1
        if self._weights[pos] <= 0:
            pos = self._nearest_positive(pos)
        return pos

    def sample(self, rng: np.random.Generator) -> int:
        if self._total <= 0:
            raise ValueError("总权重为零，无法按权抽样")
        return self.find(rng.random() * self._total)

    def _nearest_positive(self, pos: int) -> int:
        weights = self._weights
        for i in range(pos, len(weights)):
            if weights[i] > 0:
                return i
        for i in range(pos - 1, -1, -1):
            if weights[i] > 0:
                return i
        raise ValueError("总权重为零，无法按权抽样")
