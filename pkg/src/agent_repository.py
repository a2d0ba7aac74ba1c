"""
智能体仓库模块
登记智能体规格，按能力标签与协议为工作流节点和边挑选监控智能体
"""

import json
import logging
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from .workflow import DependencyEdge, RoleNode, Workflow

logger = logging.getLogger(__name__)

MAX_CONTEXT_WINDOW = 1024
AGENT_TYPES = ("common", "specialized")
EFFICIENCY_CLASSES = ("light", "standard")

# 工作流监控智能体统一使用的协议
MONITOR_PROTOCOL = ("workflow_state", "monitor_report")

NODE_REQUIREMENT_TAG = "role_tracking"
EDGE_REQUIREMENTS = {
    "temporal": frozenset({"temporal", "timing"}),
    "spatial": frozenset({"spatial", "route"}),
    "safety": frozenset({"safety", "oven_watch"}),
    "resource": frozenset({"resource", "availability"}),
    "data": frozenset({"data", "schema"}),
}

COMMON_AGENTS: Tuple[Tuple[str, Tuple[str, ...]], ...] = (
    ("Role Manager Agent", ("role_tracking", "qualification", "assignment")),
    ("Spatial Agent", ("spatial", "route", "location")),
    ("Temporal Agent", ("temporal", "timing", "deadline", "schedule")),
    ("Resource Agent", ("resource", "vehicle", "drive", "availability")),
    ("Reasoning and Explanation Agent", ("reasoning", "explanation", "rationale")),
    ("Common Sense Agent", ("common_sense", "implicit_constraint")),
    ("Constraint Validation Agent", ("validation", "constraint", "consistency")),
    ("Plan Evaluation Agent", ("evaluation", "metrics", "scoring")),
    ("What-If Testing Agent", ("what_if", "disruption", "scenario")),
    ("Compliance and Safety Agent", ("safety", "compliance", "oven_watch", "supervise")),
)


class RegistrationError(ValueError):
    """智能体重复登记或规格不合法"""


@dataclass(frozen=True)
class AgentSpec:
    id: str
    capabilities: FrozenSet[str]
    protocol: Tuple[str, str] = MONITOR_PROTOCOL
    agent_type: str = "common"
    context_window: int = MAX_CONTEXT_WINDOW
    efficiency_class: str = "light"
    rating: float = 0.0
    registration_seq: Optional[int] = None

    def __post_init__(self):
        if self.agent_type not in AGENT_TYPES:
            raise ValueError(f"未知的智能体类型: {self.agent_type}")
        if self.efficiency_class not in EFFICIENCY_CLASSES:
            raise ValueError(f"未知的效率等级: {self.efficiency_class}")
        if not 0.0 <= self.rating <= 5.0:
            raise ValueError(f"评分应在 0-5 之间: {self.rating}")


@dataclass(frozen=True)
class Requirement:
    required: FrozenSet[str]
    needed_input_schema: str = MONITOR_PROTOCOL[0]
    needed_output_schema: str = MONITOR_PROTOCOL[1]
    kind_hint: Optional[str] = None

    def __post_init__(self):
        if not self.required:
            raise ValueError("需求标签不能为空")


@dataclass(frozen=True)
class Assignment:
    node_map: Dict[str, str] = field(default_factory=dict)
    edge_map: Dict[str, str] = field(default_factory=dict)
    total_distance: int = 0
    defects: Tuple[str, ...] = ()


def capability_distance(required: Iterable[str], offered: Iterable[str]) -> int:
    """未被覆盖的需求标签数"""
    return len(set(required) - set(offered))


def node_requirement(node: RoleNode) -> Requirement:
    return Requirement(frozenset({NODE_REQUIREMENT_TAG}) | frozenset(node.qualifications), kind_hint="node")


def edge_requirement(edge: DependencyEdge) -> Requirement:
    return Requirement(EDGE_REQUIREMENTS[edge.kind], kind_hint=edge.kind)


class AgentRepository:
    """
    智能体仓库

    登记在锁内串行化，registration_seq 从 1 开始连续递增。
    """

    def __init__(self):
        self._agents: Dict[str, AgentSpec] = {}
        self._lock = threading.Lock()
        self._seq = 0

    def __len__(self) -> int:
        return len(self._agents)

    def __contains__(self, agent_id: str) -> bool:
        return agent_id in self._agents

    def get(self, agent_id: str) -> Optional[AgentSpec]:
        return self._agents.get(agent_id)

    def agents(self) -> List[AgentSpec]:
        return sorted(self._agents.values(), key=lambda a: a.registration_seq)

    def register(self, spec: AgentSpec) -> AgentSpec:
        """
        登记智能体

        Args:
            spec: 智能体规格，registration_seq 由仓库分配

        Returns:
            带有 registration_seq 的规格

        Raises:
            RegistrationError: id 重复或上下文窗口超过上限
        """
        if spec.context_window > MAX_CONTEXT_WINDOW:
            raise RegistrationError(f"{spec.id} 的上下文窗口 {spec.context_window} 超过 {MAX_CONTEXT_WINDOW}")
        with self._lock:
            if spec.id in self._agents:
                raise RegistrationError(f"智能体已登记: {spec.id}")
            self._seq += 1
            stored = replace(spec, registration_seq=self._seq)
            self._agents[spec.id] = stored
        logger.info(f"登记智能体 {spec.id}（序号 {stored.registration_seq}）")
        return stored

    def match(self, requirement: Requirement) -> List[AgentSpec]:
        """
        按需求排序候选智能体

        至少覆盖一个需求标签、协议一致；按 (距离, -评分, 登记序号) 排序
        """
        wanted = len(requirement.required)
        candidates = [
            a for a in self._agents.values()
            if capability_distance(requirement.required, a.capabilities) < wanted
            and a.protocol == (requirement.needed_input_schema, requirement.needed_output_schema)
        ]
        return sorted(candidates, key=lambda a: (capability_distance(requirement.required, a.capabilities),
                                                 -a.rating, a.registration_seq))

    def best(self, requirement: Requirement) -> Optional[Tuple[AgentSpec, int]]:
        ranked = self.match(requirement)
        if not ranked:
            return None
        return ranked[0], capability_distance(requirement.required, ranked[0].capabilities)

    def assign_node_agents(self, workflow: Workflow) -> Assignment:
        node_map: Dict[str, str] = {}
        defects: List[str] = []
        total = 0
        for node in workflow.nodes:
            found = self.best(node_requirement(node))
            if found is None:
                logger.warning(f"节点 {node.id} 没有可用的监控智能体")
                defects.append(node.id)
                continue
            node_map[node.id] = found[0].id
            total += found[1]
        return Assignment(node_map=node_map, total_distance=total, defects=tuple(defects))

    def assign_edge_agents(self, workflow: Workflow) -> Assignment:
        edge_map: Dict[str, str] = {}
        defects: List[str] = []
        total = 0
        for edge in workflow.edges:
            found = self.best(edge_requirement(edge))
            if found is None:
                logger.warning(f"边 {edge.id} 没有可用的监控智能体")
                defects.append(edge.id)
                continue
            edge_map[edge.id] = found[0].id
            total += found[1]
        return Assignment(edge_map=edge_map, total_distance=total, defects=tuple(defects))

    def assign(self, workflow: Workflow) -> Assignment:
        """同时为节点和边分配智能体"""
        nodes = self.assign_node_agents(workflow)
        edges = self.assign_edge_agents(workflow)
        return Assignment(node_map=nodes.node_map, edge_map=edges.edge_map,
                          total_distance=nodes.total_distance + edges.total_distance,
                          defects=nodes.defects + edges.defects)

    def seed_common_agents(self) -> List[AgentSpec]:
        """登记 10 个通用智能体；重复调用会因 id 重复报错"""
        return [self.register(AgentSpec(agent_id, frozenset(tags))) for agent_id, tags in COMMON_AGENTS]


def apply_assignment(workflow: Workflow, assignment: Assignment) -> Workflow:
    """把分配结果写入节点与边，返回新工作流"""
    nodes = tuple(replace(n, node_agent=assignment.node_map.get(n.id, n.node_agent)) for n in workflow.nodes)
    edges = tuple(replace(e, edge_agent=assignment.edge_map.get(e.id, e.edge_agent)) for e in workflow.edges)
    return replace(workflow, nodes=nodes, edges=edges)


def spec_from_dict(data: Dict) -> AgentSpec:
    protocol = data.get("protocol", list(MONITOR_PROTOCOL))
    return AgentSpec(
        id=data["id"],
        capabilities=frozenset(data.get("capabilities", [])),
        protocol=(protocol[0], protocol[1]),
        agent_type=data.get("agent_type", "common"),
        context_window=int(data.get("context_window", MAX_CONTEXT_WINDOW)),
        efficiency_class=data.get("efficiency_class", "light"),
        rating=float(data.get("rating", 0.0)),
    )


def load_catalog(file_path: Union[str, Path]) -> List[AgentSpec]:
    """
    从 JSON 列表加载智能体目录

    Raises:
        FileNotFoundError: 文件不存在
        ValueError: 内容不是列表或字段非法
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"智能体目录不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise ValueError(f"智能体目录应为列表: {path}")
    specs = [spec_from_dict(item) for item in data]
    logger.info(f"智能体目录加载成功: {len(specs)} 个")
    return specs


def default_repository() -> AgentRepository:
    repo = AgentRepository()
    repo.seed_common_agents()
    return repo
