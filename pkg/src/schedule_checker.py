"""
调度检查模块
按规则目录 R1-R12 检查调度，并计算满足率、松弛、空闲等指标
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .rules import RULE_CATALOG, SOFT_RULES
from .scenario import Scenario, ScenarioActor, Schedule, ScheduleEntry, ScheduleFormatError, format_clock

logger = logging.getLogger(__name__)

BASE_RULES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R12")


@dataclass(frozen=True)
class Violation:
    rule: str
    window: Tuple[int, int]
    description: str
    hard: bool = True
    actor: Optional[str] = None

    def __str__(self) -> str:
        start, end = self.window
        return f"{self.rule} [{format_clock(start)}-{format_clock(end)}] {self.description}"


@dataclass(frozen=True)
class ViolationReport:
    """violations 只含硬违规；软违规单独列出"""
    violations: Tuple[Violation, ...] = ()
    soft_violations: Tuple[Violation, ...] = ()

    def __len__(self) -> int:
        return len(self.violations)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def hard_codes(self) -> Set[str]:
        return {v.rule for v in self.violations}

    def soft_codes(self) -> Set[str]:
        return {v.rule for v in self.soft_violations}

    def violated_rules(self) -> Set[str]:
        return self.hard_codes() | self.soft_codes()

    def by_rule(self, rule: str) -> List[Violation]:
        return [v for v in self.violations + self.soft_violations if v.rule == rule]


@dataclass(frozen=True)
class ScheduleMetrics:
    satisfaction_pct: float
    total_slack: int
    idle: Dict[str, int] = field(default_factory=dict)
    makespan: int = 0
    travel: int = 0

    @property
    def total_idle(self) -> int:
        return sum(self.idle.values())


@dataclass(frozen=True)
class Stay:
    """某人在某地停留的区间 [start, end)，end 为 None 表示一直停留"""
    location: str
    start: int
    end: Optional[int] = None

    def covers(self, minute: int) -> bool:
        return self.start <= minute and (self.end is None or minute < self.end)


def entry_order(entry: ScheduleEntry) -> Tuple[int, int, int]:
    """同一时刻不占用的条目（放入烤箱、开始看守）排在前面"""
    return entry.start, 1 if entry.occupying else 0, entry.end


def _drives(entries: Iterable[ScheduleEntry]) -> List[ScheduleEntry]:
    return [e for e in entries if e.is_drive]


def initial_position(scenario: Scenario, actor: ScenarioActor,
                     entries: List[ScheduleEntry]) -> Tuple[str, int]:
    """
    参与者在调度开始时的位置及可用时刻

    航班到达者从落地时刻出现在到达地点；可改道的人若第一段行程从出发地开出，
    则一开始就在出发地，否则在到达时刻隐式到达。
    """
    if actor.is_flight and actor.arrival:
        return actor.arrival.location, actor.arrival.minute
    if actor.reroutable and actor.arrival:
        drives = _drives(entries)
        if drives and drives[0].route[0] == actor.origin:
            return actor.origin, scenario.start
        return actor.arrival.location, actor.arrival.minute
    return actor.origin, scenario.start


def actor_stays(scenario: Scenario, schedule: Schedule, actor: ScenarioActor) -> List[Stay]:
    entries = sorted(schedule.for_actor(actor.id), key=entry_order)
    location, available = initial_position(scenario, actor, entries)
    stays = [Stay(location, available)]
    for drive in _drives(entries):
        last = stays[-1]
        stays[-1] = Stay(last.location, last.start, max(last.start, drive.start))
        stays.append(Stay(drive.route[1], drive.end))
    return stays


def location_at(stays: List[Stay], minute: int) -> Optional[str]:
    """某一分钟所在地点；在途或尚未到达返回 None"""
    for stay in stays:
        if stay.covers(minute):
            return stay.location
    return None


def _windows(minutes: List[int]) -> List[Tuple[int, int]]:
    """把有序分钟列表合并为极大区间 [start, end)"""
    windows: List[Tuple[int, int]] = []
    for m in minutes:
        if windows and windows[-1][1] == m:
            windows[-1] = (windows[-1][0], m + 1)
        else:
            windows.append((m, m + 1))
    return windows


def _overlaps(a: Tuple[int, int], b: Tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _required_location(scenario: Scenario, actor: ScenarioActor, entry: ScheduleEntry) -> Optional[str]:
    if entry.is_drive:
        return entry.route[0]
    if entry.kind in ("turkey", "side_dishes"):
        try:
            return scenario.task(entry.kind).location
        except KeyError:
            return scenario.home
    if entry.kind in ("supervise", "chores"):
        return scenario.home
    if entry.kind in ("luggage", "rental"):
        return actor.arrival.location if actor.arrival else None
    return None


def pickup_drive(schedule: Schedule, scenario: Scenario, passenger: ScenarioActor) -> Optional[ScheduleEntry]:
    """乘客从其所在地点被接走的第一段行程"""
    origin = scenario.pickup_location(passenger)
    candidates = [
        e for e in schedule.by_kind("drive")
        if passenger.id in e.assignees[1:] and e.route[0] == origin
    ]
    return min(candidates, key=lambda e: e.start) if candidates else None


def passengers(scenario: Scenario) -> List[ScenarioActor]:
    """不会开车且不在家的人需要被接送"""
    return [a for a in scenario.actors if not a.drives and a.origin != scenario.home]


class ScheduleChecker:
    """对单个场景执行规则检查"""

    def __init__(self, scenario: Scenario, schedule: Schedule):
        self.scenario = scenario
        self.schedule = schedule
        self.hard: List[Violation] = []
        self.soft: List[Violation] = []
        self._stays = {a.id: actor_stays(scenario, schedule, a) for a in scenario.actors}

    def _flag(self, rule: str, window: Tuple[int, int], description: str, actor: Optional[str] = None):
        hard = rule not in SOFT_RULES
        (self.hard if hard else self.soft).append(Violation(rule, window, description, hard, actor))

    def _at_home(self, actor_id: str, minute: int) -> bool:
        return location_at(self._stays[actor_id], minute) == self.scenario.home

    # ---- 规则 ----

    def check_cooking(self):
        """R1 监督任务 / R3 其它烹饪任务"""
        deadline = self.scenario.deadline
        for task in self.scenario.tasks:
            rule = "R1" if task.supervised else "R3"
            entries = self.schedule.by_kind(task.id)
            if not entries:
                self._flag(rule, (deadline, deadline), f"缺少任务 {task.id}")
                continue
            for e in entries:
                if e.duration < task.duration:
                    self._flag(rule, (e.start, e.end), f"{task.id} 只有 {e.duration} 分钟，需要 {task.duration} 分钟")
                if e.end > deadline:
                    self._flag(rule, (e.start, e.end), f"{task.id} 在 {format_clock(e.end)} 才完成，晚于截止时间")

    def check_occupancy(self):
        """R2 监督任务期间家中有人"""
        for task in self.scenario.tasks:
            if not task.supervised:
                continue
            for e in self.schedule.by_kind(task.id):
                empty = [m for m in range(e.start, e.end)
                         if not any(self._at_home(a.id, m) for a in self.scenario.actors)]
                for window in _windows(empty):
                    self._flag("R2", window, f"{task.id} 进行时家中无人看守")

    def check_pickups(self):
        """R4 乘客接送"""
        for p in passengers(self.scenario):
            drive = pickup_drive(self.schedule, self.scenario, p)
            ready = self.scenario.ready_time(p)
            if drive is None:
                self._flag("R4", (ready, ready), f"{p.id} 没有被接送", p.id)
            elif drive.start < ready:
                self._flag("R4", (drive.start, drive.end),
                           f"{p.id} 在 {format_clock(ready)} 前无法上车", p.id)

    def check_rentals(self):
        """R5 租车"""
        for actor in self.scenario.actors:
            if not actor.needs_rental:
                continue
            rentals = [e for e in self.schedule.for_actor(actor.id) if e.kind == "rental"]
            if not rentals:
                self._flag("R5", (self.scenario.start, self.scenario.start), f"{actor.id} 没有租车", actor.id)
                continue
            rental = min(rentals, key=lambda e: e.start)
            earliest = self.scenario.ready_time(actor)
            if rental.start < earliest:
                self._flag("R5", (rental.start, rental.end),
                           f"{actor.id} 的租车早于 {format_clock(earliest)}", actor.id)
            if rental.duration < self.scenario.rental_minutes:
                self._flag("R5", (rental.start, rental.end),
                           f"{actor.id} 的租车只有 {rental.duration} 分钟", actor.id)
            for drive in self.schedule.by_kind("drive"):
                if drive.driver == actor.id and drive.start < rental.end:
                    self._flag("R5", (drive.start, drive.end), f"{actor.id} 租车完成前就开车", actor.id)

    def check_locations(self):
        """R6 位置连续性与路程时间"""
        for actor in self.scenario.actors:
            entries = sorted(self.schedule.for_actor(actor.id), key=entry_order)
            location, available = initial_position(self.scenario, actor, entries)
            for e in entries:
                if e.kind in ("dinner", "wait"):
                    continue
                required = _required_location(self.scenario, actor, e)
                if e.start < available:
                    self._flag("R6", (e.start, e.end), f"{actor.id} 在 {format_clock(e.start)} 尚未到达", actor.id)
                elif required is not None and location != required:
                    self._flag("R6", (e.start, e.end),
                               f"{actor.id} 在 {format_clock(e.start)} 位于 {location}，而 {e.task} 需要在 {required}",
                               actor.id)
                if e.is_drive:
                    origin, destination = e.route
                    if e.driver == actor.id:
                        needed = self.scenario.travel_time(origin, destination)
                        if needed is None:
                            self._flag("R6", (e.start, e.end), f"{origin} 与 {destination} 之间没有路线", actor.id)
                        elif e.duration < needed:
                            self._flag("R6", (e.start, e.end),
                                       f"{origin}->{destination} 只用 {e.duration} 分钟，路程需要 {needed} 分钟",
                                       actor.id)
                    location = destination

    def check_dinner(self):
        """R7 晚餐与全员到家"""
        deadline = self.scenario.deadline
        dinner = self.schedule.dinner()
        if dinner is not None and dinner.start != deadline:
            self._flag("R7", (dinner.start, dinner.end), f"晚餐在 {format_clock(dinner.start)} 开始")
        for actor in self.scenario.actors:
            if not self._at_home(actor.id, deadline):
                self._flag("R7", (deadline, deadline), f"{actor.id} 截止时刻不在家", actor.id)

    def check_drivers(self):
        """R8 非司机不开车"""
        for drive in self.schedule.by_kind("drive"):
            driver = self.scenario.actor(drive.driver)
            if not driver.drives:
                self._flag("R8", (drive.start, drive.end), f"{driver.id} 不会开车", driver.id)

    def check_overlaps(self):
        """R9 占用时段不重叠"""
        for actor in self.scenario.actors:
            busy = sorted((e for e in self.schedule.for_actor(actor.id) if e.occupying),
                          key=lambda e: (e.start, e.end))
            for prev, nxt in zip(busy, busy[1:]):
                if nxt.start < prev.end:
                    self._flag("R9", (nxt.start, min(prev.end, nxt.end)),
                               f"{actor.id} 同时进行 {prev.task} 与 {nxt.task}", actor.id)

    def check_preferences(self):
        """R10 / R11 软偏好，仅在场景启用补充依赖时检查"""
        for pref in self.scenario.active_preferences():
            if pref.kind == "prefers_driver":
                passenger_id, driver_id = pref.actors
                if not self.scenario.has_actor(passenger_id):
                    continue
                drive = pickup_drive(self.schedule, self.scenario, self.scenario.actor(passenger_id))
                if drive is not None and drive.driver != driver_id:
                    self._flag("R10", (drive.start, drive.end),
                               f"{passenger_id} 希望由 {driver_id} 接送，实际为 {drive.driver}", passenger_id)
            elif pref.kind == "avoid_overlap":
                a, b = pref.actors
                cooking = {t.id for t in self.scenario.tasks}
                spans_a = [(e.start, e.end) for e in self.schedule.for_actor(a) if e.kind in cooking]
                spans_b = [(e.start, e.end) for e in self.schedule.for_actor(b) if e.kind in cooking]
                for sa in spans_a:
                    for sb in spans_b:
                        if _overlaps(sa, sb):
                            self._flag("R11", (max(sa[0], sb[0]), min(sa[1], sb[1])),
                                       f"{a} 与 {b} 同时做饭")

    def check_start(self):
        """R12 不早于场景开始"""
        for e in self.schedule:
            if e.start < self.scenario.start:
                self._flag("R12", (e.start, e.end),
                           f"{e.task} 早于 {format_clock(self.scenario.start)} 开始")

    def run(self) -> ViolationReport:
        for e in self.schedule:
            for name in e.assignees:
                if not self.scenario.has_actor(name):
                    raise ScheduleFormatError(f"调度中出现未知参与者: {name}")
        self.check_cooking()
        self.check_occupancy()
        self.check_pickups()
        self.check_rentals()
        self.check_locations()
        self.check_dinner()
        self.check_drivers()
        self.check_overlaps()
        self.check_preferences()
        self.check_start()
        return ViolationReport(tuple(self.hard), tuple(self.soft))


def check_schedule(scenario: Scenario, schedule: Schedule) -> ViolationReport:
    """
    检查调度是否满足规则目录

    Args:
        scenario: 场景
        schedule: 待检查的调度

    Returns:
        ViolationReport，violations 为空表示满足全部硬规则
    """
    report = ScheduleChecker(scenario, schedule).run()
    if report.violations:
        logger.info(f"调度检查发现 {len(report.violations)} 个硬违规: {sorted(report.hard_codes())}")
    return report


# ---------------------------------------------------------------------------
# 指标

def applicable_rules(scenario: Scenario) -> List[str]:
    rules = list(BASE_RULES)
    kinds = {p.kind for p in scenario.active_preferences()}
    if "prefers_driver" in kinds:
        rules.append("R10")
    if "avoid_overlap" in kinds:
        rules.append("R11")
    return rules


def _union_length(intervals: List[Tuple[int, int]], lo: int, hi: int) -> int:
    total = 0
    cursor = lo
    for start, end in sorted(intervals):
        start, end = max(start, cursor), min(end, hi)
        if end > start:
            total += end - start
            cursor = end
    return total


def actor_idle(scenario: Scenario, schedule: Schedule, actor: ScenarioActor) -> int:
    """首末活动之间未被占用的分钟数（等待计为空闲）"""
    entries = sorted((e for e in schedule.for_actor(actor.id) if e.kind != "dinner"), key=entry_order)
    points: List[int] = []
    _, available = initial_position(scenario, actor, entries)
    if available > scenario.start:
        points.append(available)
    busy: List[Tuple[int, int]] = []
    for e in entries:
        points.append(e.start)
        if e.occupying:
            points.append(e.end)
            if e.kind != "wait":
                busy.append((e.start, e.end))
    if not points:
        return 0
    first = max(min(points), scenario.start)
    last = min(max(points), scenario.deadline)
    if last <= first:
        return 0
    return (last - first) - _union_length(busy, first, last)


def total_slack(scenario: Scenario, schedule: Schedule) -> int:
    """烹饪任务完成到截止的余量，加上离家者最后到家到截止的余量"""
    deadline = scenario.deadline
    slack = 0
    for task in scenario.tasks:
        entries = schedule.by_kind(task.id)
        if entries:
            slack += max(0, deadline - max(e.end for e in entries))
    for actor in scenario.actors:
        stays = actor_stays(scenario, schedule, actor)
        home_all_day = len(stays) == 1 and stays[0].location == scenario.home and stays[0].start <= scenario.start
        if home_all_day:
            continue
        final = stays[-1]
        if final.location == scenario.home:
            slack += max(0, deadline - final.start)
    return slack


def total_travel(scenario: Scenario, schedule: Schedule) -> int:
    """全部行程分钟数，含未改道者的隐式到达行程"""
    travel = sum(e.duration for e in schedule.by_kind("drive"))
    for actor in scenario.actors:
        if actor.reroutable and actor.arrival:
            entries = sorted(schedule.for_actor(actor.id), key=entry_order)
            location, _ = initial_position(scenario, actor, entries)
            if location != actor.origin:
                travel += scenario.travel_time(actor.origin, actor.arrival.location) or 0
    return travel


def compute_metrics(scenario: Scenario, schedule: Schedule,
                    report: Optional[ViolationReport] = None) -> ScheduleMetrics:
    """
    计算调度指标

    Args:
        scenario: 场景
        schedule: 调度
        report: 已有的检查结果，缺省时重新检查

    Returns:
        ScheduleMetrics
    """
    if report is None:
        report = check_schedule(scenario, schedule)
    rules = applicable_rules(scenario)
    violated = report.violated_rules()
    satisfied = sum(1 for r in rules if r not in violated)
    entries = list(schedule)
    makespan = max(e.end for e in entries) - min(e.start for e in entries) if entries else 0
    return ScheduleMetrics(
        satisfaction_pct=100.0 * satisfied / len(rules),
        total_slack=total_slack(scenario, schedule),
        idle={a.id: actor_idle(scenario, schedule, a) for a in scenario.actors},
        makespan=makespan,
        travel=total_travel(scenario, schedule),
    )


def ipc_score(pairs: Iterable[Tuple[float, float]]) -> float:
    """
    IPC 风格评分 Σ T*/T

    Args:
        pairs: (最优已知完成时间, 实际完成时间) 列表
    """
    score = 0.0
    for best, actual in pairs:
        if best <= 0 or actual < best:
            raise ValueError(f"需要 T >= T* > 0，实际为 T*={best}, T={actual}")
        score += best / actual
    return score


def rule_summary() -> Dict[str, str]:
    return {code: text for code, (text, _) in RULE_CATALOG.items()}
