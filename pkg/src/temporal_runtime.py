"""
时间运行时模块
五维状态空间上的转移验证与恢复、偏差监控、早期预警与扰动重规划
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from .agent_repository import AgentRepository
from .greedy_scheduler import greedy_schedule
from .meta_planner import PlanningProblem, PlanResult, plan
from .scenario import Scenario, Schedule, format_clock, parse_clock
from .schedule_checker import ScheduleMetrics, ViolationReport, total_travel
from .workflow import Constraint, Workflow, temporal_graph

logger = logging.getLogger(__name__)

ACTIONS = ("travel", "start_task", "end_task", "pickup", "handoff")
CHECK_ORDER = ("temporal", "spatial", "qualification", "resource", "preference")

# 约束类型 -> (严重度, 紧急度)
SEVERITY_DEFAULTS: Dict[str, Tuple[int, int]] = {
    "safety": (5, 5),
    "temporal": (4, 3),
    "spatial": (3, 3),
    "resource": (3, 2),
    "preference": (1, 1),
}

RECOVERY_STEP = 15
RELAX_COST = 60
VEHICLES = frozenset({"car", "rental_car"})
OVEN = "oven"


# ---------------------------------------------------------------------------
# 状态空间

@dataclass(frozen=True)
class ActorState:
    role: str
    location: str
    resources_held: FrozenSet[str] = frozenset()
    busy_until: int = 0


@dataclass(frozen=True)
class ActiveTask:
    task: str
    actor: str
    start: int
    end: int
    supervised: bool = False


@dataclass(frozen=True)
class WorldState:
    clock: int
    actors: Dict[str, ActorState]
    active_tasks: Tuple[ActiveTask, ...] = ()
    rationale_log: Tuple[Tuple[int, str], ...] = ()

    def actor(self, actor_id: str) -> ActorState:
        return self.actors[actor_id]

    def running(self, minute: int) -> List[ActiveTask]:
        return [t for t in self.active_tasks if t.end > minute]


@dataclass(frozen=True)
class TransitionProposal:
    actor: str
    action: str
    params: Dict[str, str] = field(default_factory=dict)
    start: int = 0
    end: int = 0
    relaxed: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValueError(f"未知的动作: {self.action}")
        if self.end < self.start:
            raise ValueError(f"结束时间早于开始时间: {self.start}-{self.end}")

    def shifted(self, minutes: int) -> "TransitionProposal":
        return replace(self, start=self.start + minutes, end=self.end + minutes)


@dataclass(frozen=True)
class TransitionResult:
    accepted: bool
    state: WorldState
    failed_check: Optional[str] = None
    message: str = ""
    rule: Optional[str] = None


def initial_state(scenario: Scenario, mapping: Optional[Dict[str, str]] = None) -> WorldState:
    """
    场景开始时的世界状态

    航班到达者在到达地点，取行李与租车完成后才空闲；其余人在出发地。
    """
    roles: Dict[str, str] = {}
    for role, person in (mapping or {}).items():
        roles.setdefault(person, role)

    actors = {}
    for a in scenario.actors:
        if a.is_flight and a.arrival:
            ready = a.arrival.minute + scenario.luggage_minutes
            held = frozenset()
            if a.needs_rental:
                ready += scenario.rental_minutes
                held = frozenset({"rental_car"})
            actors[a.id] = ActorState(roles.get(a.id, ""), a.arrival.location, held, max(ready, scenario.start))
        else:
            held = frozenset({"car"}) if a.drives else frozenset()
            actors[a.id] = ActorState(roles.get(a.id, ""), a.origin, held, scenario.start)
    return WorldState(scenario.start, actors)


# ---------------------------------------------------------------------------
# 转移验证

class _Rejected(Exception):
    def __init__(self, check: str, message: str, rule: Optional[str] = None):
        super().__init__(message)
        self.check = check
        self.message = message
        self.rule = rule


def _route(state: WorldState, proposal: TransitionProposal, scenario: Scenario) -> List[Tuple[str, str]]:
    """行驶类动作经过的路段"""
    here = state.actor(proposal.actor).location
    if proposal.action == "travel":
        return [(proposal.params.get("from", here), proposal.params["to"])]
    if proposal.action == "pickup":
        passenger = scenario.actor(proposal.params["passenger"])
        stop = state.actor(passenger.id).location
        return [(proposal.params.get("from", here), stop), (stop, proposal.params.get("to", scenario.home))]
    return []


def _task_location(scenario: Scenario, task_id: str) -> str:
    try:
        return scenario.task(task_id).location
    except KeyError:
        return scenario.home


def _required_qualification(scenario: Scenario, proposal: TransitionProposal) -> Optional[str]:
    if proposal.action in ("travel", "pickup"):
        return "drive"
    if proposal.action == "start_task":
        task_id = proposal.params["task"]
        if task_id == "supervise":
            return "supervise"
        if any(t.id == task_id for t in scenario.tasks):
            return "cook"
    return None


def _present_at_home(state: WorldState, actor_id: str, minute: int, scenario: Scenario) -> bool:
    a = state.actor(actor_id)
    if a.location != scenario.home:
        return False
    return a.busy_until <= minute or any(t.actor == actor_id for t in state.active_tasks)


class TransitionValidator:
    """前置检查 -> 原子应用 -> 后置检查"""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    # ---- 前置检查 ----

    def check_temporal(self, state: WorldState, p: TransitionProposal):
        s = self.scenario
        actor = state.actor(p.actor)
        if p.start < s.start:
            raise _Rejected("temporal", f"{format_clock(p.start)} 早于开始时间 {format_clock(s.start)}", "R12")
        if p.action != "end_task" and p.start < actor.busy_until:
            raise _Rejected("temporal", f"{p.actor} 在 {format_clock(actor.busy_until)} 前忙碌", "R9")
        if p.end > s.deadline:
            raise _Rejected("temporal", f"{format_clock(p.end)} 晚于截止时间", "R7")
        legs = _route(state, p, s)
        needed = sum(s.travel_time(a, b) or 0 for a, b in legs)
        if legs and p.end - p.start < needed:
            raise _Rejected("temporal", f"行程需要 {needed} 分钟，只安排了 {p.end - p.start} 分钟", "R6")
        if p.action == "pickup":
            passenger = s.actor(p.params["passenger"])
            ready = max(s.ready_time(passenger), state.actor(passenger.id).busy_until)
            outbound = s.travel_time(*legs[0]) or 0
            if p.start + outbound < ready:
                raise _Rejected("temporal", f"{passenger.id} 在 {format_clock(ready)} 前无法上车", "R4")

    def check_spatial(self, state: WorldState, p: TransitionProposal):
        s = self.scenario
        here = state.actor(p.actor).location
        legs = _route(state, p, s)
        if legs and legs[0][0] != here:
            raise _Rejected("spatial", f"{p.actor} 位于 {here}，不在 {legs[0][0]}", "R6")
        for a, b in legs:
            if s.travel_time(a, b) is None:
                raise _Rejected("spatial", f"{a} 与 {b} 之间没有路线", "R6")
        if p.action == "start_task":
            where = _task_location(s, p.params["task"])
            if here != where:
                raise _Rejected("spatial", f"{p.params['task']} 需要在 {where}，{p.actor} 位于 {here}", "R6")

    def check_qualification(self, state: WorldState, p: TransitionProposal):
        needed = _required_qualification(self.scenario, p)
        if needed is not None and needed not in self.scenario.actor(p.actor).qualifications:
            raise _Rejected("qualification", f"{p.actor} 不具备 {needed} 资格", "R8" if needed == "drive" else None)
        if p.action == "handoff":
            receiver = p.params["to"]
            if "supervise" not in self.scenario.actor(receiver).qualifications:
                raise _Rejected("qualification", f"{receiver} 不能接手看守", None)

    def check_resource(self, state: WorldState, p: TransitionProposal):
        actor = state.actor(p.actor)
        if p.action in ("travel", "pickup") and not (actor.resources_held & VEHICLES):
            raise _Rejected("resource", f"{p.actor} 没有可用车辆", "R5")
        if p.action == "start_task":
            task_id = p.params["task"]
            supervised = any(t.id == task_id and t.supervised for t in self.scenario.tasks)
            if supervised and any(t.supervised for t in state.running(p.start)):
                raise _Rejected("resource", "烤箱正在使用", None)

    def check_preference(self, state: WorldState, p: TransitionProposal):
        prefs = sorted(self.scenario.active_preferences(), key=lambda x: x.priority)
        cooking = {t.id for t in self.scenario.tasks}
        for pref in prefs:
            if pref.kind == "prefers_driver" and p.action == "pickup" and "R10" not in p.relaxed:
                passenger, driver = pref.actors
                if p.params["passenger"] == passenger and p.actor != driver:
                    raise _Rejected("preference", f"{passenger} 希望由 {driver} 接送", "R10")
            elif pref.kind == "avoid_overlap" and p.action == "start_task" and "R11" not in p.relaxed:
                if p.params["task"] not in cooking or p.actor not in pref.actors:
                    continue
                others = set(pref.actors) - {p.actor}
                if any(t.actor in others and t.task in cooking for t in state.running(p.start)):
                    raise _Rejected("preference", f"{' 与 '.join(pref.actors)} 不宜同时做饭", "R11")

    # ---- 应用 ----

    def apply(self, state: WorldState, p: TransitionProposal) -> WorldState:
        s = self.scenario
        actors = dict(state.actors)
        tasks = list(state.active_tasks)
        actor = actors[p.actor]
        if p.action in ("travel", "pickup"):
            destination = _route(state, p, s)[-1][1]
            actors[p.actor] = replace(actor, location=destination, busy_until=p.end)
            if p.action == "pickup":
                rider = p.params["passenger"]
                actors[rider] = replace(actors[rider], location=destination, busy_until=p.end)
            decision = f"{p.actor} {p.action} -> {destination}"
        elif p.action == "start_task":
            task_id = p.params["task"]
            supervised = any(t.id == task_id and t.supervised for t in s.tasks)
            tasks.append(ActiveTask(task_id, p.actor, p.start, p.end, supervised))
            held = actor.resources_held | ({OVEN} if supervised else frozenset())
            busy = p.start if supervised or task_id == "supervise" else p.end
            actors[p.actor] = replace(actor, resources_held=held, busy_until=max(actor.busy_until, busy))
            decision = f"{p.actor} 开始 {task_id}"
        elif p.action == "end_task":
            task_id = p.params["task"]
            tasks = [t for t in tasks if not (t.task == task_id and t.actor == p.actor)]
            actors[p.actor] = replace(actor, resources_held=actor.resources_held - {OVEN})
            decision = f"{p.actor} 结束 {task_id}"
        else:
            task_id, receiver = p.params["task"], p.params["to"]
            tasks = [replace(t, actor=receiver) if t.task == task_id and t.actor == p.actor else t for t in tasks]
            decision = f"{p.actor} 把 {task_id} 交给 {receiver}"
        log = state.rationale_log + ((p.start, decision),)
        return WorldState(max(state.clock, p.start), actors, tuple(tasks), log)

    # ---- 后置检查 ----

    def check_safety(self, before: WorldState, after: WorldState, p: TransitionProposal):
        s = self.scenario
        if p.action == "handoff" and not _present_at_home(before, p.params["to"], p.start, s):
            raise _Rejected("safety", f"{p.params['to']} 不在家，无法接手看守", "R2")
        if not any(t.supervised or t.task == "supervise" for t in after.running(p.start)):
            return
        leaving = p.action in ("travel", "pickup")
        for minute in (p.start, p.end - 1 if p.end > p.start else p.start):
            home = [a for a in after.actors
                    if not (leaving and a == p.actor) and _present_at_home(after, a, minute, s)]
            if not home:
                raise _Rejected("safety", f"{format_clock(minute)} 烤箱工作时家中无人", "R2")

    def check_deadline(self, after: WorldState):
        s = self.scenario
        for name, a in after.actors.items():
            back = s.travel_time(a.location, s.home)
            if back is None or a.busy_until + back > s.deadline:
                raise _Rejected("deadline", f"{name} 无法在截止前回家", "R7")

    def validate(self, state: WorldState, p: TransitionProposal) -> TransitionResult:
        try:
            if p.actor not in state.actors:
                raise _Rejected("qualification", f"未知的参与者: {p.actor}")
            for check in CHECK_ORDER:
                getattr(self, f"check_{check}")(state, p)
            after = self.apply(state, p)
            self.check_safety(state, after, p)
            self.check_deadline(after)
        except _Rejected as rejected:
            return TransitionResult(False, state, rejected.check, rejected.message, rejected.rule)
        return TransitionResult(True, after)


def validate_transition(state: WorldState, proposal: TransitionProposal, scenario: Scenario) -> TransitionResult:
    """
    验证并应用一次状态转移

    Args:
        state: 当前世界状态
        proposal: 转移提议
        scenario: 场景（约束来源）

    Returns:
        TransitionResult；被拒绝时 state 就是传入的同一对象
    """
    return TransitionValidator(scenario).validate(state, proposal)


# ---------------------------------------------------------------------------
# 恢复

@dataclass(frozen=True)
class Candidate:
    proposal: Optional[TransitionProposal]
    cost: float
    feasible: bool = True
    strategy: str = ""
    delay: int = 0
    relaxed: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class Solution:
    candidate: Candidate

    @property
    def cost(self) -> float:
        return self.candidate.cost


@dataclass(frozen=True)
class NoSolution:
    reason: str = "没有可行的候选方案"


def _cost(delay: int, relaxed: Iterable[str]) -> int:
    return delay + RELAX_COST * len(set(relaxed))


def recover(state: WorldState, failed: TransitionProposal, scenario: Scenario) -> List[Candidate]:
    """
    为被拒绝的提议生成替代方案

    依次尝试：按 15 分钟步长后移、替换为其他合格参与者、按优先级从低到高逐步放宽软约束；
    结果按 cost = 延迟 + 60 × 放宽数 稳定排序
    """
    validator = TransitionValidator(scenario)
    first = validator.validate(state, failed)
    logger.info(f"恢复 {failed.actor} 的 {failed.action}：{first.failed_check} 检查失败（{first.message}）")
    candidates: List[Candidate] = []

    delay = RECOVERY_STEP
    while failed.end + delay <= scenario.deadline:
        moved = failed.shifted(delay)
        if validator.validate(state, moved).accepted:
            candidates.append(Candidate(moved, _cost(delay, ()), strategy="shift", delay=delay))
            break
        delay += RECOVERY_STEP

    for a in scenario.actors:
        if a.id == failed.actor or a.id not in state.actors:
            continue
        if failed.action == "pickup" and a.id == failed.params.get("passenger"):
            continue
        params = {k: v for k, v in failed.params.items() if k != "from"}
        substitute = replace(failed, actor=a.id, params=params)
        if validator.validate(state, substitute).accepted:
            candidates.append(Candidate(substitute, _cost(0, ()), strategy="substitute"))

    relaxed = set(failed.relaxed)
    attempt = validator.validate(state, failed)
    while not attempt.accepted and attempt.failed_check == "preference" and attempt.rule not in relaxed:
        relaxed.add(attempt.rule)
        loosened = replace(failed, relaxed=frozenset(relaxed))
        attempt = validator.validate(state, loosened)
        if attempt.accepted:
            added = relaxed - set(failed.relaxed)
            candidates.append(Candidate(loosened, _cost(0, added), strategy="relax", relaxed=frozenset(added)))

    candidates.sort(key=lambda c: c.cost)
    if not candidates:
        logger.warning(f"{failed.actor} 的 {failed.action} 在截止前没有替代方案")
    return candidates


def generate_solution(candidates: Sequence[Candidate]) -> Union[Solution, NoSolution]:
    """可行候选中 cost 最小者，平局取先出现的"""
    best: Optional[Candidate] = None
    for c in candidates:
        if c.feasible and (best is None or c.cost < best.cost):
            best = c
    return Solution(best) if best is not None else NoSolution()


# ---------------------------------------------------------------------------
# 监控

@dataclass(frozen=True)
class DeviationThresholds:
    buffer: int = 15
    tau: int = 30

    def __post_init__(self):
        if not 0 < self.buffer < self.tau:
            raise ValueError(f"需要 0 < buffer < tau，实际为 {self.buffer}, {self.tau}")


def classify_deviation(planned: int, actual: int, thresholds: DeviationThresholds = DeviationThresholds()) -> str:
    """Δt = planned − actual，返回 normal / warning / violation"""
    delta = abs(planned - actual)
    if delta < thresholds.buffer:
        return "normal"
    if delta < thresholds.tau:
        return "warning"
    return "violation"


def impact(event: Optional["DisruptionEvent"], affected: Iterable[Tuple[int, int]]) -> int:
    """Σ 严重度 × 紧急度"""
    total = 0
    for severity, urgency in affected:
        if not (1 <= severity <= 5 and 1 <= urgency <= 5):
            raise ValueError(f"严重度与紧急度应在 1-5 之间: ({severity}, {urgency})")
        total += severity * urgency
    return total


# ---------------------------------------------------------------------------
# 早期预警与扰动

@dataclass(frozen=True)
class DisruptionEvent:
    detected_at: int
    kind: str
    actor: str
    old_time: int
    new_time: int

    def __post_init__(self):
        if self.new_time < self.old_time:
            raise ValueError(f"新时间 {self.new_time} 早于原计划 {self.old_time}")

    @property
    def delay(self) -> int:
        return self.new_time - self.old_time


@dataclass(frozen=True)
class Alert:
    event: DisruptionEvent
    severity: int
    delay: int


@dataclass(frozen=True)
class ReplanDirective:
    affected_nodes: Tuple[str, ...]
    time_window: Tuple[int, int]
    impact: int = 0
    ratings: Tuple[Tuple[int, int], ...] = ()


class EarlyInformationAgent:
    """监控上游事件（航班状态），尽早发出预警与重规划指令"""

    def __init__(self, thresholds: DeviationThresholds = DeviationThresholds()):
        self.thresholds = thresholds

    def observe(self, event: DisruptionEvent) -> Alert:
        severity = min(5, 1 + event.delay // self.thresholds.tau)
        level = classify_deviation(event.old_time, event.new_time, self.thresholds)
        logger.info(f"早期预警: {format_clock(event.detected_at)} 获知 {event.actor} {event.kind}，"
                    f"延误 {event.delay} 分钟（{level}，严重度 {severity}）")
        return Alert(event, severity, event.delay)

    def analyze(self, alert: Alert, workflow: Workflow, scenario: Scenario) -> ReplanDirective:
        """直接受影响的节点取 (severity, 5)，经时间边下游的节点取时间类默认值"""
        actor = alert.event.actor
        direct_roles = {o.role for o in scenario.objectives if o.action == "pickup" and o.target == actor}
        direct = [n.id for n in workflow.nodes if n.assigned_person == actor or n.id in direct_roles]

        graph = temporal_graph(workflow.edges)
        downstream: List[str] = []
        for node_id in direct:
            if node_id in graph:
                downstream.extend(d for d in nx.descendants(graph, node_id) if d not in direct)
        downstream = [n.id for n in workflow.nodes if n.id in set(downstream)]

        ratings = [(alert.severity, 5)] * len(direct) + [SEVERITY_DEFAULTS["temporal"]] * len(downstream)
        return ReplanDirective(tuple(direct + downstream), (alert.event.detected_at, scenario.deadline),
                               impact(alert.event, ratings), tuple(ratings))


@dataclass(frozen=True)
class Update:
    reassignments: Dict[str, str] = field(default_factory=dict)
    delay_minutes: int = 0
    affected_nodes: Tuple[str, ...] = ()


def apply_update(workflow: Workflow, update: Update) -> Workflow:
    """
    应用协调更新

    重分配节点人员；受影响节点（及其时间下游）出发的时间边 metadata["offset"] 增加延误分钟数。
    原工作流不变。
    """
    for node_id in update.reassignments:
        if not workflow.has_node(node_id):
            raise KeyError(f"未知的节点: {node_id}")
    nodes = tuple(
        replace(n, assigned_person=update.reassignments[n.id]) if n.id in update.reassignments else n
        for n in workflow.nodes
    )
    shifted = set()
    if update.delay_minutes:
        graph = temporal_graph(workflow.edges)
        for node_id in update.affected_nodes:
            shifted.add(node_id)
            if node_id in graph:
                shifted |= nx.descendants(graph, node_id)
    edges = []
    for e in workflow.edges:
        if e.kind == "temporal" and e.from_node in shifted:
            metadata = dict(e.metadata)
            metadata["offset"] = int(metadata.get("offset", 0)) + update.delay_minutes
            e = replace(e, metadata=metadata)
        edges.append(e)
    return replace(workflow, nodes=nodes, edges=tuple(edges))


@dataclass(frozen=True)
class DisruptionOutcome:
    workflow: Workflow
    schedule: Optional[Schedule]
    metrics: Optional[ScheduleMetrics]
    report: Optional[ViolationReport]
    plan: PlanResult
    alert: Optional[Alert] = None
    directive: Optional[ReplanDirective] = None
    rationale_log: Tuple[Tuple[int, str], ...] = ()

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


def derived_delay_constraint(event: DisruptionEvent) -> Constraint:
    return Constraint(
        id=f"derived:{event.kind}:{event.actor}",
        origin="derived", kind="temporal", hard=True, priority=5, rule="R12",
        params={"actor": event.actor, "not_before": event.detected_at, "landing": event.new_time},
        description=f"{event.actor} 于 {format_clock(event.new_time)} 落地，{format_clock(event.detected_at)} 起重新规划",
    )


def handle_disruption(problem: PlanningProblem, event: DisruptionEvent,
                      repo: Optional[AgentRepository] = None,
                      thresholds: DeviationThresholds = DeviationThresholds()) -> DisruptionOutcome:
    """
    扰动处理：以获知时刻为新起点重新规划

    Args:
        problem: 基线规划问题
        event: 扰动事件
        repo: 智能体仓库
        thresholds: 偏差阈值

    Returns:
        DisruptionOutcome；不可行时 schedule 为 None 并附违规报告
    """
    if problem.scenario is None:
        raise ValueError("扰动处理需要场景事实")
    if event.delay == 0:
        result = plan(problem, repo)
        return DisruptionOutcome(result.workflow, result.schedule, result.metrics, result.report, result)

    agent = EarlyInformationAgent(thresholds)
    alert = agent.observe(event)
    scenario = problem.scenario.with_arrival(event.actor, event.new_time)
    scenario = scenario.with_start(max(scenario.start, event.detected_at))

    derived = derived_delay_constraint(event)
    updated = replace(problem, scenario=scenario)
    if derived.id not in {c.id for c in problem.all_constraints()}:
        updated = updated.with_derived([derived])

    result = plan(updated, repo)
    directive = agent.analyze(alert, result.workflow, scenario)
    log = (
        (event.detected_at, f"早期预警: {event.actor} {event.kind} 延误 {event.delay} 分钟，严重度 {alert.severity}"),
        (event.detected_at, f"重规划: 受影响节点 {list(directive.affected_nodes)}，影响度 {directive.impact}"),
        (event.detected_at, "重规划成功" if result.feasible else "重规划失败: " + "; ".join(result.defects)),
    )
    if not result.feasible:
        logger.warning(f"{event.actor} 延误后没有可行调度")
    return DisruptionOutcome(result.workflow, result.schedule, result.metrics, result.report, result,
                             alert, directive, log)


def compare_routings(scenario: Scenario, mapping: Dict[str, str]) -> Union[Solution, NoSolution]:
    """反应式候选：允许/禁止改道两种调度，以总行程为 cost"""
    candidates = []
    for allow in (True, False):
        result = greedy_schedule(scenario, mapping, allow_reroute=allow)
        cost = total_travel(scenario, result.schedule) if result.feasible else float("inf")
        candidates.append(Candidate(None, cost, result.feasible, "reroute" if allow else "default"))
    return generate_solution(candidates)


def load_events(file_path: Union[str, Path], scenario: Optional[Scenario] = None) -> List[DisruptionEvent]:
    """
    读取扰动事件 JSON 列表

    缺少 old_time 时从场景中该人的到达时间取值
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"事件文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise ValueError(f"事件文件应为列表: {path}")

    events = []
    for item in data:
        if "old_time" in item:
            old_time = parse_clock(item["old_time"])
        elif scenario is not None and scenario.has_actor(item["actor"]) and scenario.actor(item["actor"]).arrival:
            old_time = scenario.actor(item["actor"]).arrival.minute
        else:
            raise ValueError(f"事件缺少 old_time 且无法从场景推断: {item}")
        events.append(DisruptionEvent(parse_clock(item["detected_at"]), item.get("kind", "flight_delay"),
                                      item["actor"], old_time, parse_clock(item["new_time"])))
    logger.info(f"扰动事件加载成功: {len(events)} 个")
    return events
