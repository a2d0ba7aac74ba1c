"""
元启发式 TSP 求解器
蚁群（ACO）、遗传算法（GA）与模拟退火（SA），全部由种子决定结果
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .tsp_solvers import (
    Tour, as_matrix, brute_force, edges, held_karp, is_symmetric, is_valid_tour, nearest_neighbor,
    select_algorithm, tour_length,
)

logger = logging.getLogger(__name__)

# d = 0 的非对角边使用的可见度上限
ETA_CAP = 1e6


@dataclass(frozen=True)
class AcoParams:
    ants: int = 100
    iterations: int = 50
    rho: float = 0.1
    alpha: float = 1.0
    beta: float = 2.0
    deposit_q: float = 10.0
    tau0: float = 0.1
    stagnation_k: Optional[int] = 5
    seed: int = 0
    depot: int = 0
    # 以最近邻环路作为初始最优解
    warm_start: bool = True

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho 应在 (0, 1] 内: {self.rho}")
        if self.ants < 1 or self.iterations < 1:
            raise ValueError("蚂蚁数与迭代次数至少为 1")
        if self.tau0 <= 0:
            raise ValueError("初始信息素必须为正")


ACO_PRESETS: Dict[str, AcoParams] = {
    "small": AcoParams(ants=50, iterations=20, stagnation_k=5),
    "large": AcoParams(ants=100, iterations=50, stagnation_k=None),
}


@dataclass(frozen=True)
class GaParams:
    population: int = 100
    generations: int = 200
    tournament_size: int = 3
    mutation_rate: float = 0.2
    seed: int = 0
    depot: int = 0
    # 初始种群包含最近邻环路
    warm_start: bool = True

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise ValueError(f"种群规模必须是不小于 2 的偶数: {self.population}")
        if self.generations < 1:
            raise ValueError("代数至少为 1")
        if self.tournament_size < 1:
            raise ValueError("锦标赛规模至少为 1")
        if not 0 <= self.mutation_rate <= 1:
            raise ValueError("变异率应在 [0, 1] 内")


@dataclass(frozen=True)
class SaParams:
    t0: Optional[float] = None
    cooling: float = 0.95
    t_min: float = 0.1
    steps_per_temperature: int = 1
    seed: int = 0
    depot: int = 0

    def __post_init__(self):
        if not 0 < self.cooling < 1:
            raise ValueError(f"冷却系数应在 (0, 1) 内: {self.cooling}")
        if self.t_min <= 0:
            raise ValueError("终止温度必须为正")
        if self.steps_per_temperature < 1:
            raise ValueError("每个温度至少一步")


# ---------------------------------------------------------------------------
# ACO

class AntColony:
    """
    蚁群求解器

    每只蚂蚁使用由 (seed, 迭代, 蚂蚁) 派生的独立随机流，所有蚂蚁都按 Q/L 沉积信息素。
    warm_start 为真时最优解从最近邻环路开始记录。
    """

    def __init__(self, matrix, params: AcoParams = AcoParams()):
        self.matrix = as_matrix(matrix)
        self.params = params
        self.n = len(self.matrix)
        self.symmetric = is_symmetric(self.matrix)
        with np.errstate(divide="ignore"):
            eta = np.where(self.matrix > 0, 1.0 / np.maximum(self.matrix, 1e-12), ETA_CAP)
        np.fill_diagonal(eta, 0.0)
        self.visibility = eta ** params.beta
        self.pheromone = np.full((self.n, self.n), params.tau0)
        self.history: List[int] = []
        self.evaluations = 0

    def construct(self, rng: np.random.Generator) -> List[int]:
        p = self.params
        order = [p.depot]
        unvisited = [c for c in range(self.n) if c != p.depot]
        while unvisited:
            here = order[-1]
            candidates = np.array(unvisited)
            weights = (self.pheromone[here, candidates] ** p.alpha) * self.visibility[here, candidates]
            total = weights.sum()
            if not np.isfinite(total) or total <= 0:
                nxt = int(candidates[0])
            else:
                nxt = int(rng.choice(candidates, p=weights / total))
            order.append(nxt)
            unvisited.remove(nxt)
        return order

    def deposit(self, order: Sequence[int], length: int):
        amount = self.params.deposit_q / length if length > 0 else self.params.deposit_q
        for a, b in edges(order):
            self.pheromone[a, b] += amount
            if self.symmetric:
                self.pheromone[b, a] += amount

    def run(self) -> Tour:
        p = self.params
        best: Optional[Tour] = nearest_neighbor(self.matrix, p.depot) if p.warm_start else None
        self.evaluations = 1 if p.warm_start else 0
        stagnant = 0
        for it in range(p.iterations):
            tours = []
            for ant in range(p.ants):
                rng = np.random.default_rng([p.seed, it, ant])
                order = self.construct(rng)
                tours.append((order, tour_length(self.matrix, order)))
            self.evaluations += len(tours)

            self.pheromone *= (1 - p.rho)
            for order, length in tours:
                self.deposit(order, length)

            order, length = min(tours, key=lambda t: t[1])
            if best is None or length < best.length:
                best = Tour(tuple(order), length)
                stagnant = 0
            else:
                stagnant += 1
            self.history.append(best.length)
            if p.stagnation_k is not None and stagnant >= p.stagnation_k:
                logger.debug(f"ACO 连续 {stagnant} 轮无改进，第 {it + 1} 轮停止")
                break
        return replace(best, evaluations=self.evaluations)


def aco(matrix, params: AcoParams = AcoParams()) -> Tour:
    return AntColony(matrix, params).run()


# ---------------------------------------------------------------------------
# GA

def repair(order: Sequence[int], n: int, depot: int = 0) -> List[int]:
    """去掉重复与越界地点，按下标顺序补齐缺失地点，并把 depot 放到首位"""
    seen = set()
    fixed = []
    for c in order:
        if 0 <= c < n and c not in seen:
            seen.add(c)
            fixed.append(c)
    fixed.extend(c for c in range(n) if c not in seen)
    if fixed[0] != depot:
        fixed.remove(depot)
        fixed.insert(0, depot)
    return fixed


def edge_recombination(parent_a: Sequence[int], parent_b: Sequence[int], rng: np.random.Generator,
                       depot: int = 0) -> List[int]:
    """边重组交叉：优先走向邻接表最短的邻居"""
    adjacency = {c: set() for c in parent_a}
    for parent in (parent_a, parent_b):
        for a, b in edges(parent):
            adjacency[a].add(b)
            adjacency[b].add(a)

    child = [depot]
    remaining = set(parent_a) - {depot}
    for neighbours in adjacency.values():
        neighbours.discard(depot)
    current = depot
    while remaining:
        options = sorted(adjacency[current] & remaining)
        if options:
            fewest = min(len(adjacency[c]) for c in options)
            ties = [c for c in options if len(adjacency[c]) == fewest]
            nxt = ties[int(rng.integers(len(ties)))]
        else:
            pool = sorted(remaining)
            nxt = pool[int(rng.integers(len(pool)))]
        child.append(nxt)
        remaining.discard(nxt)
        for neighbours in adjacency.values():
            neighbours.discard(nxt)
        current = nxt
    return child


def two_opt_mutation(order: Sequence[int], rng: np.random.Generator) -> List[int]:
    """反转 depot 之后的一段子路径"""
    order = list(order)
    if len(order) < 4:
        return order
    i, j = sorted(int(x) for x in rng.choice(np.arange(1, len(order)), size=2, replace=False))
    order[i:j + 1] = reversed(order[i:j + 1])
    return order


class GeneticSolver:
    """锦标赛选择 + 边重组交叉 + 2-opt 变异 + 修复 + 精英保留 1 个"""

    def __init__(self, matrix, params: GaParams = GaParams()):
        self.matrix = as_matrix(matrix)
        self.params = params
        self.n = len(self.matrix)
        self.rng = np.random.default_rng(params.seed)
        self.history: List[int] = []
        self.population_sizes: List[int] = []
        self.evaluations = 0

    def _length(self, order: Sequence[int]) -> int:
        self.evaluations += 1
        return tour_length(self.matrix, order)

    def initial_population(self) -> List[List[int]]:
        depot = self.params.depot
        others = np.array([c for c in range(self.n) if c != depot])
        population = [list(nearest_neighbor(self.matrix, depot).order)] if self.params.warm_start else []
        while len(population) < self.params.population:
            population.append([depot] + [int(c) for c in self.rng.permutation(others)])
        return population

    def tournament(self, population: List[List[int]], lengths: List[int]) -> List[int]:
        picks = self.rng.integers(0, len(population), size=self.params.tournament_size)
        winner = min(picks, key=lambda i: (lengths[i], i))
        return population[int(winner)]

    def run(self) -> Tour:
        p = self.params
        population = self.initial_population()
        lengths = [self._length(t) for t in population]
        for _ in range(p.generations):
            elite = min(range(len(population)), key=lambda i: (lengths[i], i))
            nxt = [population[elite]]
            nxt_lengths = [lengths[elite]]
            while len(nxt) < p.population:
                child = edge_recombination(self.tournament(population, lengths),
                                           self.tournament(population, lengths), self.rng, p.depot)
                if self.rng.random() < p.mutation_rate:
                    child = two_opt_mutation(child, self.rng)
                child = repair(child, self.n, p.depot)
                nxt.append(child)
                nxt_lengths.append(self._length(child))
            population, lengths = nxt, nxt_lengths
            self.population_sizes.append(len(population))
            self.history.append(min(lengths))

        best = min(range(len(population)), key=lambda i: (lengths[i], i))
        return Tour(tuple(population[best]), lengths[best], self.evaluations)


def ga(matrix, params: GaParams = GaParams()) -> Tour:
    return GeneticSolver(matrix, params).run()


# ---------------------------------------------------------------------------
# SA

def acceptance_probability(delta: float, temperature: float) -> float:
    """ΔE ≤ 0 总是接受，否则为 exp(−ΔE/T)"""
    if delta <= 0:
        return 1.0
    return math.exp(-delta / temperature)


def default_temperature(matrix: np.ndarray) -> float:
    """初温取非对角平均边权的 10 倍"""
    n = len(matrix)
    mean = (matrix.sum() - np.trace(matrix)) / (n * (n - 1))
    return 10.0 * float(mean)


class Annealer:
    def __init__(self, matrix, params: SaParams = SaParams(), initial: Optional[Sequence[int]] = None):
        self.matrix = as_matrix(matrix)
        self.params = params
        self.n = len(self.matrix)
        if initial is not None and not is_valid_tour(initial, self.n, params.depot):
            raise ValueError(f"初始环路不合法: {list(initial)}")
        self.initial = list(initial) if initial is not None else list(nearest_neighbor(self.matrix, params.depot).order)
        self.rng = np.random.default_rng(params.seed)
        self.temperatures: List[float] = []
        self.evaluations = 0

    def neighbour(self, order: List[int]) -> List[int]:
        return two_opt_mutation(order, self.rng)

    def run(self) -> Tour:
        p = self.params
        current = self.initial
        current_length = tour_length(self.matrix, current)
        best, best_length = list(current), current_length
        self.evaluations = 1
        temperature = p.t0 if p.t0 is not None else default_temperature(self.matrix)

        while temperature >= p.t_min and self.n >= 4:
            self.temperatures.append(temperature)
            for _ in range(p.steps_per_temperature):
                candidate = self.neighbour(current)
                length = tour_length(self.matrix, candidate)
                self.evaluations += 1
                if self.rng.random() < acceptance_probability(length - current_length, temperature):
                    current, current_length = candidate, length
                    if current_length < best_length:
                        best, best_length = list(current), current_length
            temperature *= p.cooling
        return Tour(tuple(best), best_length, self.evaluations)


def sa(matrix, params: SaParams = SaParams(), initial: Optional[Sequence[int]] = None) -> Tour:
    return Annealer(matrix, params, initial).run()


# ---------------------------------------------------------------------------
# 统一入口

ALGORITHMS = ("brute", "hk", "nn", "aco", "ga", "sa")


def solve_tsp(matrix, algo: Optional[str] = None, seed: int = 0, preset: str = "large",
              aco_presets: Optional[Dict[str, AcoParams]] = None,
              ga_params: Optional[GaParams] = None, sa_params: Optional[SaParams] = None) -> Tour:
    """
    按算法名求解

    Args:
        matrix: 距离矩阵
        algo: brute / hk / nn / aco / ga / sa，缺省按规模自动选择
        seed: 随机种子
        preset: ACO 预设 small / large
    """
    matrix = as_matrix(matrix)
    algo = algo or select_algorithm(len(matrix))
    if algo not in ALGORITHMS:
        raise ValueError(f"未知的算法: {algo}，可选: {', '.join(ALGORITHMS)}")
    logger.info(f"使用 {algo} 求解 n = {len(matrix)} 的 TSP")

    if algo == "brute":
        length, optimal = brute_force(matrix)
        return Tour(optimal[0], length, evaluations=math.factorial(len(matrix) - 1))
    if algo == "hk":
        return held_karp(matrix)
    if algo == "nn":
        return nearest_neighbor(matrix)
    if algo == "aco":
        presets = aco_presets or ACO_PRESETS
        if preset not in presets:
            raise ValueError(f"未知的 ACO 预设: {preset}")
        return aco(matrix, replace(presets[preset], seed=seed))
    if algo == "ga":
        return ga(matrix, replace(ga_params or GaParams(), seed=seed))
    return sa(matrix, replace(sa_params or SaParams(), seed=seed))
