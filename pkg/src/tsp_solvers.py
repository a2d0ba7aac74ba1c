"""
TSP 求解模块
距离矩阵、环路评估、精确解法（穷举 / Held-Karp）、最近邻与算法选择
"""

import itertools
import logging
import math
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 11
HELD_KARP_LIMIT = 20

# 五个地点的对称行程时间（分钟）
CAMPUS5 = [
    [0, 5, 8, 4, 7],
    [5, 0, 6, 3, 8],
    [8, 6, 0, 5, 4],
    [4, 3, 5, 0, 6],
    [7, 8, 4, 6, 0],
]

# 十个地点的非对称行程时间（分钟）
CAMPUS10 = [
    [0, 12, 8, 15, 9, 14, 7, 11, 10, 6],
    [10, 0, 7, 14, 6, 16, 9, 13, 5, 8],
    [9, 5, 0, 11, 8, 12, 10, 7, 15, 4],
    [14, 8, 12, 0, 10, 9, 13, 6, 11, 7],
    [7, 13, 6, 9, 0, 8, 5, 12, 14, 10],
    [11, 9, 15, 8, 12, 0, 7, 10, 13, 5],
    [5, 7, 10, 6, 11, 9, 0, 8, 12, 15],
    [8, 14, 4, 10, 7, 13, 6, 0, 9, 11],
    [12, 6, 9, 7, 15, 10, 8, 5, 0, 14],
    [9, 10, 7, 13, 5, 11, 14, 8, 12, 0],
]


class SolverGuardError(ValueError):
    """问题规模超出精确解法的保护上限"""


@dataclass(frozen=True)
class Tour:
    order: Tuple[int, ...]
    length: int
    evaluations: int = field(default=0, compare=False)

    def closed(self) -> Tuple[int, ...]:
        return self.order + self.order[:1]

    def labels(self) -> str:
        return format_tour(self.order)


def as_matrix(data: Union[np.ndarray, Sequence[Sequence[int]]]) -> np.ndarray:
    """
    校验并转换距离矩阵

    Raises:
        ValueError: 非方阵、n < 2、非数值、含负数或对角线非零
    """
    matrix = np.asarray(data)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"距离矩阵必须是方阵，实际形状 {matrix.shape}")
    if matrix.shape[0] < 2:
        raise ValueError("距离矩阵至少需要 2 个地点")
    if not np.issubdtype(matrix.dtype, np.number) or np.issubdtype(matrix.dtype, np.complexfloating):
        raise ValueError(f"距离必须是数值，实际类型 {matrix.dtype}")
    if not np.issubdtype(matrix.dtype, np.integer):
        if not np.all(np.equal(np.mod(matrix, 1), 0)):
            raise ValueError("距离必须是整数分钟")
        matrix = matrix.astype(np.int64)
    if np.any(matrix < 0):
        raise ValueError("距离不能为负")
    if np.any(np.diag(matrix) != 0):
        raise ValueError("距离矩阵对角线必须为 0")
    return matrix


def is_symmetric(matrix: np.ndarray) -> bool:
    return bool(np.array_equal(matrix, matrix.T))


def format_tour(order: Sequence[int]) -> str:
    """[0, 3, 1] -> "A-D-B-A" """
    closed = list(order) + list(order[:1])
    if len(order) <= 26:
        return "-".join(string.ascii_uppercase[i] for i in closed)
    return "-".join(str(i) for i in closed)


def parse_tour(text: str) -> List[int]:
    """"A-D-B-A" -> [0, 3, 1]，首尾相同时去掉结尾"""
    parts = [p.strip() for p in text.split("-") if p.strip()]
    order = [string.ascii_uppercase.index(p) if p.isalpha() else int(p) for p in parts]
    if len(order) > 1 and order[0] == order[-1]:
        order = order[:-1]
    return order


def tour_length(matrix: np.ndarray, order: Sequence[int]) -> int:
    """闭合环路长度"""
    if len(order) < 2:
        return 0
    return int(sum(matrix[order[i], order[(i + 1) % len(order)]] for i in range(len(order))))


def is_valid_tour(order: Sequence[int], n: int, depot: Optional[int] = None) -> bool:
    if len(order) != n or sorted(order) != list(range(n)):
        return False
    return depot is None or order[0] == depot


def evaluate(order: Sequence[int], matrix) -> int:
    """环路长度；序列必须是合法排列"""
    matrix = as_matrix(matrix)
    if not is_valid_tour(order, len(matrix)):
        raise ValueError(f"不是合法的环路: {list(order)}")
    return tour_length(matrix, order)


def validation_value(order: Sequence[int], matrix, depot: int = 0) -> float:
    """合法环路返回 −length，否则返回 −∞"""
    matrix = as_matrix(matrix)
    if not is_valid_tour(order, len(matrix), depot):
        return -math.inf
    return -float(tour_length(matrix, order))


def penalized_fitness(order: Sequence[int], matrix, lam: Optional[float] = None) -> float:
    """
    带惩罚的适应度：长度 + λ × (缺失地点数 + 重复地点数)

    Args:
        order: 任意地点序列
        matrix: 距离矩阵
        lam: 惩罚系数，缺省为 n × 最大距离
    """
    matrix = as_matrix(matrix)
    n = len(matrix)
    if lam is None:
        lam = n * int(matrix.max())
    inside = [c for c in order if 0 <= c < n]
    missing = n - len(set(inside))
    repeated = len(inside) - len(set(inside))
    return float(tour_length(matrix, inside) + lam * (missing + repeated))


# ---------------------------------------------------------------------------
# 精确解法

def brute_force(matrix, depot: int = 0) -> Tuple[int, List[Tuple[int, ...]]]:
    """
    穷举全部 (n−1)! 条有向环路

    Returns:
        (最优长度, 全部最优有向环路)，环路从 depot 开始

    Raises:
        SolverGuardError: n 超过穷举上限
    """
    matrix = as_matrix(matrix)
    n = len(matrix)
    if n > BRUTE_FORCE_LIMIT:
        raise SolverGuardError(f"穷举最多支持 {BRUTE_FORCE_LIMIT} 个地点，实际 {n}")
    d = matrix.tolist()
    others = [c for c in range(n) if c != depot]
    best = math.inf
    optimal: List[Tuple[int, ...]] = []
    for perm in itertools.permutations(others):
        length = d[depot][perm[0]] + d[perm[-1]][depot]
        for a, b in zip(perm, perm[1:]):
            length += d[a][b]
        if length < best:
            best, optimal = length, [(depot,) + perm]
        elif length == best:
            optimal.append((depot,) + perm)
    logger.debug(f"穷举完成: 最优 {best}，共 {len(optimal)} 条最优环路")
    return int(best), optimal


def held_karp(matrix, depot: int = 0) -> Tour:
    """
    Held-Karp 子集动态规划

    Raises:
        SolverGuardError: n 超过内存保护上限
    """
    matrix = as_matrix(matrix)
    n = len(matrix)
    if n > HELD_KARP_LIMIT:
        raise SolverGuardError(f"Held-Karp 最多支持 {HELD_KARP_LIMIT} 个地点，实际 {n}")
    d = matrix.tolist()
    others = [c for c in range(n) if c != depot]
    m = len(others)

    # cost[(mask, k)] = 从 depot 出发、访问 mask 中地点、停在 others[k] 的最短路径
    cost = {}
    parent = {}
    for k, city in enumerate(others):
        cost[(1 << k, k)] = d[depot][city]
    for size in range(2, m + 1):
        for subset in itertools.combinations(range(m), size):
            mask = sum(1 << k for k in subset)
            for k in subset:
                prev_mask = mask ^ (1 << k)
                best, best_j = math.inf, None
                for j in subset:
                    if j == k:
                        continue
                    value = cost[(prev_mask, j)] + d[others[j]][others[k]]
                    if value < best:
                        best, best_j = value, j
                cost[(mask, k)] = best
                parent[(mask, k)] = best_j

    full = (1 << m) - 1
    best, last = math.inf, None
    for k in range(m):
        value = cost[(full, k)] + d[others[k]][depot]
        if value < best:
            best, last = value, k

    path = []
    mask = full
    while last is not None:
        path.append(others[last])
        mask, last = mask ^ (1 << last), parent.get((mask, last))
    order = (depot,) + tuple(reversed(path))
    return Tour(order, int(best), evaluations=len(cost))


def nearest_neighbor(matrix, depot: int = 0) -> Tour:
    """贪心选择最近的未访问地点，距离相同取下标最小者"""
    matrix = as_matrix(matrix)
    n = len(matrix)
    order = [depot]
    unvisited = [c for c in range(n) if c != depot]
    while unvisited:
        here = order[-1]
        nearest = min(unvisited, key=lambda c: (matrix[here, c], c))
        order.append(nearest)
        unvisited.remove(nearest)
    return Tour(tuple(order), tour_length(matrix, order), evaluations=1)


def select_algorithm(n: int) -> str:
    if n <= 8:
        return "brute"
    if n <= 15:
        return "hk"
    return "aco"


# ---------------------------------------------------------------------------
# 矩阵文件

def load_matrix(file_path: Union[str, Path]) -> np.ndarray:
    """
    读取矩阵文件：首行 n，随后 n 行空白分隔的整数

    Raises:
        FileNotFoundError: 文件不存在
        ValueError: 格式错误
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"矩阵文件不存在: {path}")
    lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"矩阵文件为空: {path}")
    try:
        n = int(lines[0])
    except ValueError as e:
        raise ValueError(f"第 1 行应为地点数量: {lines[0]!r}") from e
    if len(lines) - 1 != n:
        raise ValueError(f"需要 {n} 行距离，实际 {len(lines) - 1} 行")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        try:
            row = [int(x) for x in line.split()]
        except ValueError as e:
            raise ValueError(f"第 {number} 行含有非整数: {line!r}") from e
        if len(row) != n:
            raise ValueError(f"第 {number} 行应有 {n} 个数，实际 {len(row)} 个")
        rows.append(row)
    matrix = as_matrix(rows)
    logger.info(f"矩阵加载成功: {path.name}，n = {n}，{'对称' if is_symmetric(matrix) else '非对称'}")
    return matrix


def save_matrix(matrix, file_path: Union[str, Path]) -> None:
    matrix = as_matrix(matrix)
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [str(len(matrix))] + [" ".join(str(int(x)) for x in row) for row in matrix]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def random_matrix(n: int, rng: np.random.Generator, high: int = 20, symmetric: bool = False) -> np.ndarray:
    """随机整数矩阵，用于交叉验证"""
    matrix = rng.integers(1, high + 1, size=(n, n))
    if symmetric:
        matrix = np.triu(matrix, 1)
        matrix = matrix + matrix.T
    np.fill_diagonal(matrix, 0)
    return matrix


def edges(order: Sequence[int]) -> Iterable[Tuple[int, int]]:
    for i in range(len(order)):
        yield order[i], order[(i + 1) % len(order)]
