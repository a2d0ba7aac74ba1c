"""
贪心调度模块
给定角色到人员的映射，按 安全 > 硬时间 > 接送 > 软偏好 的优先级派发任务，
输出经过规则检查的调度或不可行结论
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .scenario import Scenario, Schedule, ScheduleEntry, TaskDescriptor
from .schedule_checker import ViolationReport, check_schedule

logger = logging.getLogger(__name__)

# 场景未给出租车时长时按 30 分钟安排
PLANNING_RENTAL_MINUTES = 30


@dataclass(frozen=True)
class SchedulingResult:
    schedule: Optional[Schedule]
    reasons: Tuple[str, ...] = ()
    codes: FrozenSet[str] = frozenset()
    report: Optional[ViolationReport] = None

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


@dataclass
class _ActorState:
    location: str
    free: int
    pending_origin: bool = False
    reservations: List[Tuple[int, int]] = field(default_factory=list)

    def conflicts(self, start: int, end: int) -> bool:
        for r_start, r_end in self.reservations:
            if r_start == r_end:
                if start < r_start < end:
                    return True
            elif start < r_end and r_start < end:
                return True
        return False


def roles_of(scenario: Scenario) -> "OrderedDict[str, List[TaskDescriptor]]":
    """角色 -> 目标列表，按首次出现排序"""
    roles: "OrderedDict[str, List[TaskDescriptor]]" = OrderedDict()
    for objective in scenario.objectives:
        roles.setdefault(objective.role, []).append(objective)
    return roles


def role_qualifications(objectives: List[TaskDescriptor]) -> FrozenSet[str]:
    tags = set()
    for objective in objectives:
        tags |= objective.capabilities
    return frozenset(tags)


class GreedyScheduler:
    """单次调度；每次构造都从干净的场景状态开始"""

    def __init__(self, scenario: Scenario, mapping: Dict[str, str], allow_reroute: bool = True):
        self.scenario = scenario
        self.mapping = dict(mapping)
        self.allow_reroute = allow_reroute
        self.entries: List[ScheduleEntry] = []
        self.reasons: List[str] = []
        self.codes: set = set()
        self.states: Dict[str, _ActorState] = {}

    def _fail(self, code: str, reason: str):
        self.codes.add(code)
        self.reasons.append(f"{code}: {reason}")

    def _add(self, start: int, end: int, task: str, *assignees: str):
        self.entries.append(ScheduleEntry(start, end, task, tuple(assignees)))

    # ---- 步骤 ----

    def check_mapping(self):
        for role, objectives in roles_of(self.scenario).items():
            person = self.mapping.get(role)
            if person is None:
                self._fail("mapping", f"角色 {role} 未分配人员")
                continue
            if not self.scenario.has_actor(person):
                self._fail("mapping", f"角色 {role} 分配给了未知人员 {person}")
                continue
            missing = role_qualifications(objectives) - self.scenario.actor(person).qualifications
            if "drive" in missing:
                self._fail("R8", f"{person} 不会开车，不能担任 {role}")
            elif missing:
                self._fail("mapping", f"{person} 缺少 {role} 所需资格 {sorted(missing)}")

    def init_states(self):
        start = self.scenario.start
        for actor in self.scenario.actors:
            if actor.is_flight and actor.arrival:
                self.states[actor.id] = _ActorState(actor.arrival.location, max(start, actor.arrival.minute))
            elif actor.reroutable and actor.arrival:
                self.states[actor.id] = _ActorState(actor.arrival.location, max(start, actor.arrival.minute),
                                                    pending_origin=True)
            else:
                self.states[actor.id] = _ActorState(actor.origin, start)

    def schedule_arrivals(self):
        """航班到达者先取行李，需要租车的人随后租车"""
        luggage = self.scenario.luggage_minutes
        rental = self.scenario.rental_minutes or PLANNING_RENTAL_MINUTES
        for actor in self.scenario.actors:
            if not actor.is_flight:
                continue
            state = self.states[actor.id]
            if luggage > 0:
                self._add(state.free, state.free + luggage, "luggage", actor.id)
                state.free += luggage
            if actor.needs_rental:
                self._add(state.free, state.free + rental, "rental", actor.id)
                state.free += rental

    def schedule_cooking(self) -> Dict[str, Tuple[int, int]]:
        """烹饪按截止时间倒排，返回 任务 -> 时段"""
        windows: Dict[str, Tuple[int, int]] = {}
        deadline = self.scenario.deadline
        for objective in self.scenario.objectives:
            if objective.action != "cook":
                continue
            person = self.mapping[objective.role]
            task = self.scenario.task(objective.target)
            start = deadline - task.duration
            if start < self.scenario.start:
                self._fail("R1" if task.supervised else "R3", f"{task.id} 来不及在截止前完成")
                continue
            windows[task.id] = (start, deadline)
            self._add(start, deadline, task.id, person)
            if task.supervised:
                self.states[person].reservations.append((start, start))
            else:
                self.states[person].reservations.append((start, deadline))
        return windows

    def schedule_supervision(self, windows: Dict[str, Tuple[int, int]]):
        for objective in self.scenario.objectives:
            if objective.action != "supervise" or objective.target not in windows:
                continue
            person = self.mapping[objective.role]
            start, end = windows[objective.target]
            self._add(start, end, "supervise", person)
            self.states[person].reservations.append((start, end))

    def _plan_trip(self, state: _ActorState, origin: str, depart_earliest: int, outbound: int,
                   pickup_at: str, ready: int) -> Optional[Tuple[int, int, int]]:
        """返回 (出发, 上车, 到家)，与预留时段冲突时顺延到预留结束之后"""
        back = self.scenario.travel_time(pickup_at, self.scenario.home)
        if back is None:
            return None
        candidates = [max(depart_earliest, ready - outbound)]
        candidates += sorted(r_end for _, r_end in state.reservations if r_end > candidates[0])
        for depart in candidates:
            board = max(depart + outbound, ready)
            home_at = board + back
            trip_start = depart if outbound > 0 else min(depart, board)
            if not state.conflicts(trip_start, home_at):
                return depart, board, home_at
        return None

    def schedule_pickups(self):
        home = self.scenario.home
        for objective in self.scenario.objectives:
            if objective.action != "pickup":
                continue
            driver_id = self.mapping[objective.role]
            driver = self.states[driver_id]
            passenger = self.scenario.actor(objective.target)
            pickup_at = self.scenario.pickup_location(passenger)
            ready = max(self.scenario.ready_time(passenger), self.states[passenger.id].free)

            outbound = self.scenario.travel_time(driver.location, pickup_at)
            default = None
            if outbound is not None:
                default = self._plan_trip(driver, driver.location, driver.free, outbound, pickup_at, ready)

            reroute = None
            actor = self.scenario.actor(driver_id)
            if self.allow_reroute and driver.pending_origin:
                direct = self.scenario.travel_time(actor.origin, pickup_at)
                if direct is not None:
                    reroute = self._plan_trip(driver, actor.origin, self.scenario.start, direct, pickup_at, ready)

            if reroute is not None and (default is None or reroute[2] < default[2]):
                depart, board, home_at = reroute
                self._add(depart, depart + self.scenario.travel_time(actor.origin, pickup_at),
                          f"drive:{actor.origin}:{pickup_at}", driver_id)
                logger.debug(f"{driver_id} 从 {actor.origin} 直接前往 {pickup_at}")
            elif default is not None:
                depart, board, home_at = default
                if outbound > 0:
                    self._add(depart, depart + outbound, f"drive:{driver.location}:{pickup_at}", driver_id)
                elif driver.free < board:
                    self._add(driver.free, board, "wait", driver_id)
            else:
                self._fail("R4", f"{driver_id} 无法接到 {passenger.id}")
                continue

            if home_at > self.scenario.deadline:
                self._fail("R7", f"{passenger.id} 到家时间 {home_at} 晚于截止时间")
                continue
            self._add(board, home_at, f"drive:{pickup_at}:{home}", driver_id, passenger.id)
            driver.location, driver.free, driver.pending_origin = home, home_at, False
            rider = self.states[passenger.id]
            rider.location, rider.free = home, home_at

    def schedule_returns(self):
        """仍在外的司机自行开车回家"""
        home = self.scenario.home
        for actor in self.scenario.actors:
            state = self.states[actor.id]
            if state.location == home or state.pending_origin or not actor.drives:
                continue
            travel = self.scenario.travel_time(state.location, home)
            if travel is None:
                continue
            self._add(state.free, state.free + travel, f"drive:{state.location}:{home}", actor.id)
            state.location, state.free = home, state.free + travel

    def run(self) -> SchedulingResult:
        self.check_mapping()
        if self.reasons:
            return SchedulingResult(None, tuple(self.reasons), frozenset(self.codes))

        self.init_states()
        self.schedule_arrivals()
        windows = self.schedule_cooking()
        self.schedule_supervision(windows)
        self.schedule_pickups()
        self.schedule_returns()
        if self.reasons:
            return SchedulingResult(None, tuple(self.reasons), frozenset(self.codes))

        if self.scenario.actors:
            deadline = self.scenario.deadline
            self._add(deadline, deadline, "dinner", *(a.id for a in self.scenario.actors))

        schedule = Schedule(tuple(self.entries)).sorted()
        report = check_schedule(self.scenario, schedule)
        if not report.feasible:
            reasons = tuple(str(v) for v in report.violations)
            return SchedulingResult(None, reasons, frozenset(report.hard_codes()), report)
        return SchedulingResult(schedule, (), frozenset(), report)


def greedy_schedule(scenario: Scenario, mapping: Dict[str, str], allow_reroute: bool = True) -> SchedulingResult:
    """
    为角色映射生成调度

    Args:
        scenario: 场景
        mapping: 角色 -> 人员
        allow_reroute: 是否允许可改道的人从出发地直接前往接人地点

    Returns:
        SchedulingResult；schedule 为 None 表示不可行
    """
    result = GreedyScheduler(scenario, mapping, allow_reroute).run()
    if not result.feasible:
        logger.debug(f"映射 {mapping} 不可行: {list(result.reasons)[:3]}")
    return result
