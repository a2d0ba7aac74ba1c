"""
工作流图模块
工作流网络 W = (N, E) 以及按来源划分的全局约束集
"""

import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Tuple

import networkx as nx

from .rules import is_known_rule

logger = logging.getLogger(__name__)

EDGE_KINDS = ("temporal", "spatial", "resource", "safety", "data")
CONSTRAINT_KINDS = EDGE_KINDS + ("preference",)
ORIGINS = ("explicit", "implicit", "derived")

# 各类边必须携带的元数据键
REQUIRED_METADATA = {
    "temporal": ("min_gap",),
    "spatial": ("route",),
}

# 一次校验最多报告的环数量
MAX_REPORTED_CYCLES = 50


class WorkflowError(ValueError):
    """工作流结构错误：重复 id、悬空端点或时间环"""


@dataclass(frozen=True)
class RoleNode:
    id: str
    role_name: str
    qualifications: frozenset = frozenset()
    assigned_person: Optional[str] = None
    node_agent: Optional[str] = None


@dataclass(frozen=True)
class DependencyEdge:
    id: str
    from_node: str
    to_node: str
    kind: str
    metadata: Dict[str, Any] = field(default_factory=dict)
    edge_agent: Optional[str] = None

    def __post_init__(self):
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"未知的边类型: {self.kind}")


@dataclass(frozen=True)
class Constraint:
    """
    约束

    谓词由规则码 rule（见 rules.RULE_CATALOG）与参数 params 组成。
    """
    id: str
    origin: str
    kind: str
    hard: bool
    priority: int
    rule: str
    params: Dict[str, Any] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"未知的约束来源: {self.origin}")
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"未知的约束类型: {self.kind}")
        if not 1 <= self.priority <= 5:
            raise ValueError(f"约束 {self.id} 的优先级应在 1-5 之间: {self.priority}")


@dataclass(frozen=True)
class ConstraintSet:
    constraints: Tuple[Constraint, ...] = ()

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def ids(self) -> List[str]:
        return [c.id for c in self.constraints]

    def get(self, constraint_id: str) -> Optional[Constraint]:
        for c in self.constraints:
            if c.id == constraint_id:
                return c
        return None

    def extend(self, constraints: Iterable[Constraint]) -> "ConstraintSet":
        """追加约束，id 重复时报错"""
        existing = set(self.ids())
        added = []
        for c in constraints:
            if c.id in existing:
                raise WorkflowError(f"约束 id 重复: {c.id}")
            existing.add(c.id)
            added.append(c)
        return ConstraintSet(self.constraints + tuple(added))


@dataclass(frozen=True)
class MetricSet:
    """评分权重与归一化时间跨度（分钟，None 表示取场景窗口）"""
    satisfaction: float = 1.0
    slack: float = 0.5
    idle: float = 0.25
    horizon: Optional[int] = None

    def __post_init__(self):
        weights = (self.satisfaction, self.slack, self.idle)
        if any(w < 0 for w in weights):
            raise ValueError("权重不能为负")
        if not any(w > 0 for w in weights):
            raise ValueError("至少需要一个正权重")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("归一化跨度必须为正")

    @property
    def weights(self) -> Dict[str, float]:
        return {"satisfaction": self.satisfaction, "slack": self.slack, "idle": self.idle}


@dataclass(frozen=True)
class Workflow:
    nodes: Tuple[RoleNode, ...] = ()
    edges: Tuple[DependencyEdge, ...] = ()
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    score: Optional[float] = None
    metrics: MetricSet = field(default_factory=MetricSet)

    def node(self, node_id: str) -> RoleNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"未知的节点: {node_id}")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def edge(self, edge_id: str) -> DependencyEdge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(f"未知的边: {edge_id}")

    def edges_of_kind(self, kind: str) -> List[DependencyEdge]:
        return [e for e in self.edges if e.kind == kind]

    def mapping(self) -> Dict[str, Optional[str]]:
        """角色 -> 人员"""
        return {n.id: n.assigned_person for n in self.nodes}


@dataclass(frozen=True)
class StructureDefect:
    code: str
    element_id: str
    message: str


@dataclass(frozen=True)
class StructureReport:
    defects: Tuple[StructureDefect, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.defects

    def __len__(self) -> int:
        return len(self.defects)

    def codes(self) -> List[str]:
        return [d.code for d in self.defects]


# ---------------------------------------------------------------------------
# 构造

def temporal_graph(edges: Iterable[DependencyEdge]) -> nx.DiGraph:
    """时间边构成的有向图，跳过自环；平行边合并，边属性 ids 记录全部边 id"""
    graph = nx.DiGraph()
    for e in edges:
        if e.kind != "temporal" or e.from_node == e.to_node:
            continue
        if graph.has_edge(e.from_node, e.to_node):
            graph[e.from_node][e.to_node]["ids"].append(e.id)
        else:
            graph.add_edge(e.from_node, e.to_node, ids=[e.id])
    return graph


def add_node(workflow: Workflow, node: RoleNode) -> Workflow:
    if workflow.has_node(node.id):
        raise WorkflowError(f"节点 id 重复: {node.id}")
    return replace(workflow, nodes=workflow.nodes + (node,))


def add_edge(workflow: Workflow, edge: DependencyEdge) -> Workflow:
    """
    添加依赖边

    Raises:
        WorkflowError: id 重复、端点不存在、自环或引入时间环
    """
    if any(e.id == edge.id for e in workflow.edges):
        raise WorkflowError(f"边 id 重复: {edge.id}")
    for endpoint in (edge.from_node, edge.to_node):
        if not workflow.has_node(endpoint):
            raise WorkflowError(f"边 {edge.id} 的端点不存在: {endpoint}")
    if edge.from_node == edge.to_node:
        raise WorkflowError(f"边 {edge.id} 是自环")
    if edge.kind == "temporal":
        graph = temporal_graph(workflow.edges + (edge,))
        if not nx.is_directed_acyclic_graph(graph):
            raise WorkflowError(f"边 {edge.id} 在时间依赖中形成环")
    return replace(workflow, edges=workflow.edges + (edge,))


def add_constraint(workflow: Workflow, constraint: Constraint) -> Workflow:
    return replace(workflow, constraints=workflow.constraints.extend([constraint]))


def temporal_order(workflow: Workflow) -> Optional[List[str]]:
    """时间边的拓扑序；存在环时返回 None"""
    graph = temporal_graph(workflow.edges)
    graph.add_nodes_from(n.id for n in workflow.nodes)
    try:
        return list(nx.topological_sort(graph))
    except nx.NetworkXUnfeasible:
        return None


def partition_constraints(constraint_set: ConstraintSet) -> Tuple[List[Constraint], List[Constraint], List[Constraint]]:
    """按来源划分为 (显式, 隐式, 派生)"""
    parts: Dict[str, List[Constraint]] = {origin: [] for origin in ORIGINS}
    for c in constraint_set:
        parts[c.origin].append(c)
    return parts["explicit"], parts["implicit"], parts["derived"]


# ---------------------------------------------------------------------------
# 校验

def validate_structure(workflow: Workflow) -> StructureReport:
    """
    检查工作流的全部结构不变式

    Returns:
        StructureReport，缺陷为空表示结构有效
    """
    defects: List[StructureDefect] = []

    def defect(code: str, element_id: str, message: str):
        defects.append(StructureDefect(code, element_id, message))

    node_ids = [n.id for n in workflow.nodes]
    for node_id in sorted({i for i in node_ids if node_ids.count(i) > 1}):
        defect("duplicate_node", node_id, f"节点 id 重复: {node_id}")
    for n in workflow.nodes:
        if not n.qualifications:
            defect("empty_qualifications", n.id, f"角色 {n.id} 没有资格要求")

    edge_ids = [e.id for e in workflow.edges]
    for edge_id in sorted({i for i in edge_ids if edge_ids.count(i) > 1}):
        defect("duplicate_edge", edge_id, f"边 id 重复: {edge_id}")

    known_nodes = set(node_ids)
    for e in workflow.edges:
        for endpoint in (e.from_node, e.to_node):
            if endpoint not in known_nodes:
                defect("dangling_endpoint", e.id, f"边 {e.id} 的端点不存在: {endpoint}")
        if e.from_node == e.to_node:
            defect("self_loop", e.id, f"边 {e.id} 是自环")
        for key in REQUIRED_METADATA.get(e.kind, ()):
            if key not in e.metadata:
                defect("missing_metadata", e.id, f"{e.kind} 边 {e.id} 缺少元数据 {key}")

    graph = temporal_graph(e for e in workflow.edges
                            if e.from_node in known_nodes and e.to_node in known_nodes)
    for cycle in itertools.islice(nx.simple_cycles(graph), MAX_REPORTED_CYCLES):
        ids: List[str] = []
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            ids.extend(graph[a][b]["ids"])
        defect("temporal_cycle", ",".join(ids), f"时间依赖存在环: {' -> '.join(ids)}")

    constraint_ids = workflow.constraints.ids()
    for cid in sorted({i for i in constraint_ids if constraint_ids.count(i) > 1}):
        defect("duplicate_constraint", cid, f"约束 id 重复: {cid}")
    known_edges = set(edge_ids)
    for c in workflow.constraints:
        if c.hard and c.priority != 5:
            defect("hard_priority", c.id, f"硬约束 {c.id} 的优先级应为 5")
        if not is_known_rule(c.rule):
            defect("unknown_rule", c.id, f"约束 {c.id} 引用了未知规则 {c.rule}")
        node_ref = c.params.get("node")
        if node_ref is not None and node_ref not in known_nodes:
            defect("unresolved_reference", c.id, f"约束 {c.id} 引用的节点不存在: {node_ref}")
        edge_ref = c.params.get("edge")
        if edge_ref is not None and edge_ref not in known_edges:
            defect("unresolved_reference", c.id, f"约束 {c.id} 引用的边不存在: {edge_ref}")

    if defects:
        logger.debug(f"结构校验发现 {len(defects)} 个缺陷")
    return StructureReport(tuple(defects))


# ---------------------------------------------------------------------------
# 序列化

def constraint_to_dict(c: Constraint) -> Dict[str, Any]:
    return {
        "id": c.id, "origin": c.origin, "kind": c.kind, "hard": c.hard,
        "priority": c.priority, "rule": c.rule, "params": c.params,
        "description": c.description,
    }


def constraint_from_dict(data: Dict[str, Any]) -> Constraint:
    hard = bool(data.get("hard", True))
    return Constraint(
        id=data["id"],
        origin=data.get("origin", "explicit"),
        kind=data["kind"],
        hard=hard,
        priority=int(data.get("priority", 5 if hard else 1)),
        rule=data["rule"],
        params=dict(data.get("params", {})),
        description=data.get("description", ""),
    )


def workflow_to_dict(workflow: Workflow) -> Dict[str, Any]:
    return {
        "nodes": [
            {"id": n.id, "role_name": n.role_name, "qualifications": sorted(n.qualifications),
             "assigned_person": n.assigned_person, "node_agent": n.node_agent}
            for n in workflow.nodes
        ],
        "edges": [
            {"id": e.id, "from_node": e.from_node, "to_node": e.to_node, "kind": e.kind,
             "metadata": e.metadata, "edge_agent": e.edge_agent}
            for e in workflow.edges
        ],
        "constraints": [constraint_to_dict(c) for c in workflow.constraints],
        "metrics": {"weights": workflow.metrics.weights, "horizon": workflow.metrics.horizon},
        "score": workflow.score,
    }


def workflow_from_dict(data: Dict[str, Any]) -> Workflow:
    nodes = tuple(
        RoleNode(n["id"], n.get("role_name", n["id"]), frozenset(n.get("qualifications", [])),
                 n.get("assigned_person"), n.get("node_agent"))
        for n in data.get("nodes", [])
    )
    edges = tuple(
        DependencyEdge(e["id"], e["from_node"], e["to_node"], e["kind"],
                       dict(e.get("metadata", {})), e.get("edge_agent"))
        for e in data.get("edges", [])
    )
    constraints = ConstraintSet(tuple(constraint_from_dict(c) for c in data.get("constraints", [])))
    metrics = data.get("metrics") or {}
    weights = metrics.get("weights", {})
    metric_set = MetricSet(
        satisfaction=float(weights.get("satisfaction", 1.0)),
        slack=float(weights.get("slack", 0.5)),
        idle=float(weights.get("idle", 0.25)),
        horizon=metrics.get("horizon"),
    )
    return Workflow(nodes, edges, constraints, data.get("score"), metric_set)


def workflow_to_json(workflow: Workflow) -> str:
    return json.dumps(workflow_to_dict(workflow), ensure_ascii=False, indent=2, sort_keys=True)


def workflow_from_json(text: str) -> Workflow:
    return workflow_from_dict(json.loads(text))
