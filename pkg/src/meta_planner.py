"""
元规划器模块
把结构化规划问题编译为工作流网络，补充隐式约束，分配监控智能体，
并用爬山法在角色 -> 人员映射上迭代改进
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .agent_repository import AgentRepository, Assignment, apply_assignment, default_repository
from .greedy_scheduler import SchedulingResult, greedy_schedule
from .knowledge_packs import DEFAULT_PACKS, apply_constraints, emit_constraints, resolve_packs
from .scenario import Scenario, Schedule, TaskDescriptor, empty_scenario
from .schedule_checker import ScheduleMetrics, ViolationReport, check_schedule, compute_metrics
from .workflow import (
    EDGE_KINDS, Constraint, ConstraintSet, DependencyEdge, MetricSet, RoleNode, Workflow, add_edge,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 100


@dataclass(frozen=True)
class Person:
    id: str
    qualifications: frozenset
    available_from: int
    available_to: int
    initial_location: str

    def __post_init__(self):
        if self.available_from > self.available_to:
            raise ValueError(f"{self.id} 的可用时间窗口无效")

    def qualified_for(self, node: RoleNode) -> bool:
        return set(node.qualifications) <= set(self.qualifications)


@dataclass(frozen=True)
class PlanningProblem:
    objectives: Tuple[TaskDescriptor, ...]
    explicit_constraints: Tuple[Constraint, ...] = ()
    people: Tuple[Person, ...] = ()
    metrics: MetricSet = field(default_factory=MetricSet)
    knowledge_packs: Tuple[str, ...] = DEFAULT_PACKS
    scenario: Optional[Scenario] = None
    implicit_constraints: Tuple[Constraint, ...] = ()
    derived_constraints: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        ids = [o.id for o in self.objectives]
        if len(ids) != len(set(ids)):
            raise ValueError(f"目标 id 重复: {sorted({i for i in ids if ids.count(i) > 1})}")

    def all_constraints(self) -> Tuple[Constraint, ...]:
        return self.explicit_constraints + self.implicit_constraints + self.derived_constraints

    def with_implicit(self, constraints: Sequence[Constraint]) -> "PlanningProblem":
        return replace(self, implicit_constraints=self.implicit_constraints + tuple(constraints))

    def with_derived(self, constraints: Sequence[Constraint]) -> "PlanningProblem":
        return replace(self, derived_constraints=self.derived_constraints + tuple(constraints))


@dataclass(frozen=True)
class RefineResult:
    workflow: Workflow
    mapping: Dict[str, Optional[str]]
    value: float
    history: Tuple[float, ...] = ()
    iterations: int = 0
    schedule: Optional[Schedule] = None
    report: Optional[ViolationReport] = None
    defects: Tuple[str, ...] = ()


@dataclass(frozen=True)
class PlanResult:
    workflow: Workflow
    schedule: Optional[Schedule]
    metrics: Optional[ScheduleMetrics]
    report: Optional[ViolationReport]
    scenario: Scenario
    mapping: Dict[str, Optional[str]] = field(default_factory=dict)
    value: float = -math.inf
    history: Tuple[float, ...] = ()
    iterations: int = 0
    assignment: Assignment = field(default_factory=Assignment)
    defects: Tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


def problem_from_scenario(scenario: Scenario, packs: Optional[Sequence[str]] = None,
                          metrics: Optional[MetricSet] = None) -> PlanningProblem:
    """由场景事实构造规划问题"""
    people = []
    for actor in scenario.actors:
        if actor.is_flight and actor.arrival:
            available_from, location = max(scenario.start, actor.arrival.minute), actor.arrival.location
        else:
            available_from, location = scenario.start, actor.origin
        people.append(Person(actor.id, actor.qualifications, available_from,
                             max(available_from, scenario.deadline), location))
    return PlanningProblem(
        objectives=scenario.objectives,
        explicit_constraints=scenario.explicit_constraints,
        people=tuple(people),
        metrics=metrics or MetricSet(),
        knowledge_packs=tuple(DEFAULT_PACKS if packs is None else packs),
        scenario=scenario,
    )


# ---------------------------------------------------------------------------
# 阶段一：网络构建

def build_network(problem: PlanningProblem) -> Workflow:
    """
    由目标与显式约束构建工作流

    Args:
        problem: 规划问题

    Returns:
        每个角色一个节点、每条跨角色显式约束一条边的工作流

    Raises:
        ValueError: 目标没有能力标签
    """
    roles: Dict[str, set] = {}
    for objective in problem.objectives:
        if not objective.capabilities:
            raise ValueError(f"目标 {objective.id} 没有能力标签")
        roles.setdefault(objective.role, set()).update(objective.capabilities)

    workflow = Workflow(
        nodes=tuple(RoleNode(role, role, frozenset(tags)) for role, tags in roles.items()),
        constraints=ConstraintSet(tuple(problem.explicit_constraints)),
        metrics=problem.metrics,
    )

    role_of = {o.id: o.role for o in problem.objectives}
    for c in problem.explicit_constraints:
        if c.kind not in EDGE_KINDS:
            continue
        related: List[str] = []
        for task_id in c.params.get("tasks", []):
            role = role_of.get(task_id)
            if role is not None and role not in related:
                related.append(role)
        if len(related) < 2:
            continue
        metadata = {"constraint": c.id}
        if c.kind == "temporal":
            metadata["min_gap"] = int(c.params.get("min_gap", 0))
        elif c.kind == "spatial":
            metadata["route"] = c.params.get("route", "")
        workflow = add_edge(workflow, DependencyEdge(f"e_{c.id}", related[0], related[1], c.kind, metadata))

    logger.info(f"网络构建完成: {len(workflow.nodes)} 个角色节点，{len(workflow.edges)} 条依赖边")
    return workflow


# ---------------------------------------------------------------------------
# 阶段二：约束增强

def augment_constraints(problem: PlanningProblem, packs: Optional[Sequence[str]] = None) -> Tuple[Constraint, ...]:
    """
    用知识包发出隐式约束，已存在的 id 会被跳过

    Raises:
        UnknownPackError: 知识包 id 无法解析
    """
    pack_ids = problem.knowledge_packs if packs is None else tuple(packs)
    resolve_packs(pack_ids)
    scenario = problem.scenario or empty_scenario()
    existing = [c.id for c in problem.all_constraints()]
    added = tuple(emit_constraints(scenario, pack_ids, existing))
    if added:
        logger.info(f"知识包 {list(pack_ids)} 补充 {len(added)} 条隐式约束")
    return added


# ---------------------------------------------------------------------------
# 阶段三：评分与迭代改进

def edge_agent_defects(workflow: Workflow, report: ViolationReport) -> List[str]:
    """边智能体监控的约束出现违规时给出缺陷描述"""
    violated = report.violated_rules()
    defects = []
    for edge in workflow.edges:
        if edge.edge_agent is None:
            continue
        constraint = workflow.constraints.get(edge.metadata.get("constraint", ""))
        if constraint is not None and constraint.rule in violated:
            defects.append(f"{edge.edge_agent} 报告边 {edge.id} 的约束 {constraint.id} 被违反")
    return defects


def score(workflow: Workflow, schedule: Optional[Schedule], metrics: MetricSet, scenario: Scenario,
          report: Optional[ViolationReport] = None) -> float:
    """
    计算工作流评分 V

    V = w_sat·满足率 + w_slack·(slack/跨度) − w_idle·(idle/(跨度·人数))；
    调度缺失、存在硬违规或边智能体报告缺陷时为 −∞
    """
    if schedule is None:
        return -math.inf
    if report is None:
        report = check_schedule(scenario, schedule)
    if report.violations or edge_agent_defects(workflow, report):
        return -math.inf

    constraints = list(workflow.constraints)
    violated = report.violated_rules()
    satisfaction = sum(1 for c in constraints if c.rule not in violated) / len(constraints) if constraints else 1.0

    m = compute_metrics(scenario, schedule, report)
    horizon = max(1, metrics.horizon or scenario.horizon)
    actors = max(1, len(scenario.actors))
    return (metrics.satisfaction * satisfaction
            + metrics.slack * m.total_slack / horizon
            - metrics.idle * m.total_idle / (horizon * actors))


def _with_mapping(workflow: Workflow, mapping: Dict[str, Optional[str]]) -> Workflow:
    return replace(workflow, nodes=tuple(replace(n, assigned_person=mapping.get(n.id)) for n in workflow.nodes))


def initial_mapping(workflow: Workflow, people: Sequence[Person]) -> Dict[str, Optional[str]]:
    """按节点顺序取第一个合格且未被使用的人，否则取第一个合格的人"""
    mapping: Dict[str, Optional[str]] = {}
    used = set()
    for node in workflow.nodes:
        qualified = [p.id for p in people if p.qualified_for(node)]
        fresh = [pid for pid in qualified if pid not in used]
        choice = fresh[0] if fresh else (qualified[0] if qualified else None)
        mapping[node.id] = choice
        if choice is not None:
            used.add(choice)
    return mapping


class _Evaluator:
    def __init__(self, problem: PlanningProblem, workflow: Workflow, scenario: Scenario):
        self.problem = problem
        self.workflow = workflow
        self.scenario = scenario
        self.calls = 0

    def __call__(self, mapping: Dict[str, Optional[str]]) -> Tuple[float, SchedulingResult]:
        self.calls += 1
        result = greedy_schedule(self.scenario, {k: v for k, v in mapping.items() if v is not None})
        value = score(_with_mapping(self.workflow, mapping), result.schedule, self.problem.metrics,
                      self.scenario, result.report)
        return value, result


def refine(problem: PlanningProblem, workflow: Workflow, repo: Optional[AgentRepository] = None,
           max_iters: int = DEFAULT_MAX_ITERS) -> RefineResult:
    """
    最陡上升爬山

    Args:
        problem: 规划问题（scenario 为已应用隐式约束的场景）
        workflow: 已分配智能体的工作流
        repo: 智能体仓库，仅用于日志
        max_iters: 最大迭代次数

    Returns:
        RefineResult；找不到可行映射时 value 为 −∞ 且 defects 非空
    """
    scenario = problem.scenario or empty_scenario()
    people = problem.people
    defects: List[str] = []

    mapping = initial_mapping(workflow, people)
    for node_id, person in mapping.items():
        if person is None:
            defects.append(f"角色 {node_id} 没有合格人员")
    if defects:
        logger.warning(f"无法构造初始映射: {defects}")
        return RefineResult(_with_mapping(workflow, mapping), mapping, -math.inf, defects=tuple(defects))

    evaluate = _Evaluator(problem, workflow, scenario)
    value, result = evaluate(mapping)
    history = [value]
    iterations = 0

    while iterations < max_iters:
        best: Optional[Tuple[float, Dict[str, Optional[str]], SchedulingResult]] = None
        for node in workflow.nodes:
            for person in people:
                if person.id == mapping[node.id] or not person.qualified_for(node):
                    continue
                candidate = dict(mapping)
                candidate[node.id] = person.id
                cand_value, cand_result = evaluate(candidate)
                if best is None or cand_value > best[0]:
                    best = (cand_value, candidate, cand_result)
        iterations += 1
        if best is None or not best[0] > value:
            break
        value, mapping, result = best
        history.append(value)
        logger.info(f"第 {iterations} 轮接受映射 {mapping}，V = {value:.4f}")

    if value == -math.inf:
        defects.append("没有可行的角色映射")
        defects.extend(result.reasons)
        logger.warning(f"规划失败，已评估 {evaluate.calls} 个映射")
    elif repo is not None:
        logger.debug(f"仓库中 {len(repo)} 个智能体参与监控")

    final = replace(_with_mapping(workflow, mapping), score=value)
    return RefineResult(final, mapping, value, tuple(history), iterations,
                        result.schedule, result.report, tuple(defects))


def prepare(problem: PlanningProblem) -> Tuple[PlanningProblem, Workflow]:
    """网络构建 + 约束增强 + 把约束写入场景"""
    workflow = build_network(problem)
    added = augment_constraints(problem)
    problem = problem.with_implicit(added)
    workflow = replace(workflow, constraints=workflow.constraints.extend(
        problem.implicit_constraints + problem.derived_constraints))
    scenario = apply_constraints(problem.scenario or empty_scenario(), problem.implicit_constraints)
    return replace(problem, scenario=scenario), workflow


def plan(problem: PlanningProblem, repo: Optional[AgentRepository] = None,
         max_iters: int = DEFAULT_MAX_ITERS) -> PlanResult:
    """
    端到端规划

    Args:
        problem: 规划问题
        repo: 智能体仓库，缺省时使用登记了通用智能体的新仓库
        max_iters: 爬山最大迭代次数

    Returns:
        PlanResult
    """
    scenario = problem.scenario or empty_scenario()
    if not problem.objectives:
        schedule = Schedule()
        report = check_schedule(scenario, schedule) if not scenario.actors else None
        return PlanResult(Workflow(metrics=problem.metrics), schedule, compute_metrics(scenario, schedule, report) if report else None,
                          report, scenario, value=0.0)

    problem, workflow = prepare(problem)
    repo = repo or default_repository()
    assignment = repo.assign(workflow)
    workflow = apply_assignment(workflow, assignment)

    refined = refine(problem, workflow, repo, max_iters)
    metrics = None
    if refined.schedule is not None:
        metrics = compute_metrics(problem.scenario, refined.schedule, refined.report)
        logger.info(f"规划完成: 映射 {refined.mapping}，V = {refined.value:.4f}")
    return PlanResult(
        workflow=refined.workflow,
        schedule=refined.schedule,
        metrics=metrics,
        report=refined.report,
        scenario=problem.scenario,
        mapping=refined.mapping,
        value=refined.value,
        history=refined.history,
        iterations=refined.iterations,
        assignment=assignment,
        defects=assignment.defects + refined.defects,
    )
