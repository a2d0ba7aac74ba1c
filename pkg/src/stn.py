"""
简单时间网络
约束 (from, to, w) 表示 t_to − t_from ≤ w，一致当且仅当距离图中没有负环
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import networkx as nx

from .scenario import Scenario, Schedule

logger = logging.getLogger(__name__)

ORIGIN = "origin"


@dataclass
class STN:
    points: List[str] = field(default_factory=list)
    constraints: List[Tuple[str, str, float]] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise ValueError("STN 的时间点 id 必须唯一")

    def add_point(self, point: str):
        if point in self.points:
            raise ValueError(f"时间点已存在: {point}")
        self.points.append(point)

    def add_constraint(self, from_point: str, to_point: str, weight: float):
        """t_to − t_from ≤ weight"""
        for p in (from_point, to_point):
            if p not in self.points:
                raise ValueError(f"未知的时间点: {p}")
        self.constraints.append((from_point, to_point, weight))

    def add_interval(self, from_point: str, to_point: str, lb: Optional[float], ub: Optional[float]):
        """lb ≤ t_to − t_from ≤ ub，None 表示无界"""
        if ub is not None:
            self.add_constraint(from_point, to_point, ub)
        if lb is not None:
            self.add_constraint(to_point, from_point, -lb)

    def distance_graph(self) -> nx.DiGraph:
        """平行约束只保留最紧的一条"""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.points)
        for u, v, w in self.constraints:
            if graph.has_edge(u, v):
                graph[u][v]["weight"] = min(graph[u][v]["weight"], w)
            else:
                graph.add_edge(u, v, weight=w)
        return graph


def stn_consistent(stn: STN) -> bool:
    """
    检查 STN 是否一致

    Returns:
        距离图中无负环时为 True
    """
    graph = stn.distance_graph()
    if graph.number_of_edges() == 0:
        return True
    # 自环权重为负时直接不一致
    for u, v, w in graph.edges(data="weight"):
        if u == v and w < 0:
            return False
    return not nx.negative_edge_cycle(graph, weight="weight")


def schedule_to_stn(scenario: Scenario, schedule: Schedule, pin_starts: bool = True) -> STN:
    """
    把调度转为 STN

    每个条目有开始/结束两个时间点；最短时长来自场景（烹饪时长、路程、行李、租车），
    烹饪必须在截止前结束，同一人的占用条目按顺序衔接。pin_starts 为 True 时开始时刻固定为调度值。
    """
    stn = STN([ORIGIN])
    deadline = scenario.deadline
    busy: dict = {}

    for i, entry in enumerate(sorted(schedule, key=lambda e: (e.start, e.end))):
        start, end = f"{i}:{entry.task}:start", f"{i}:{entry.task}:end"
        stn.add_point(start)
        stn.add_point(end)
        stn.add_interval(ORIGIN, start, scenario.start, None)
        if pin_starts:
            stn.add_interval(ORIGIN, start, entry.start, entry.start)

        minimum = 0
        if entry.is_drive:
            minimum = scenario.travel_time(*entry.route) or 0
        elif entry.kind in {t.id for t in scenario.tasks}:
            minimum = scenario.task(entry.kind).duration
            stn.add_interval(ORIGIN, end, None, deadline)
        elif entry.kind == "luggage":
            minimum = scenario.luggage_minutes
        elif entry.kind == "rental":
            minimum = scenario.rental_minutes
        stn.add_interval(start, end, minimum, None)

        if entry.occupying:
            for name in entry.assignees:
                if name in busy:
                    stn.add_interval(busy[name], start, 0, None)
                busy[name] = end

    logger.debug(f"调度转换为 STN: {len(stn.points)} 个时间点，{len(stn.constraints)} 条约束")
    return stn
