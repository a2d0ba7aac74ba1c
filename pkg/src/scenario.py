"""
场景模块
感恩节基准场景的数据模型、时钟格式转换、场景文件与调度夹具的加载
"""

import csv
import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from .workflow import Constraint, constraint_from_dict

logger = logging.getLogger(__name__)

# 航班到达者的出发地标记
FLIGHT_ORIGIN = "flight"
MINUTES_PER_DAY = 24 * 60

OCCUPYING_TASKS = {"side_dishes", "luggage", "rental", "wait", "chores"}
POINT_TASKS = {"turkey", "supervise"}
KNOWN_TASKS = OCCUPYING_TASKS | POINT_TASKS | {"dinner"}


class ScenarioParseError(ValueError):
    """场景或调度文件解析失败"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (第 {line} 行)"
        super().__init__(message)


class ScheduleFormatError(ValueError):
    """调度条目的任务码无法识别"""


def parse_clock(value: Union[str, int]) -> int:
    """
    把 "HH:MM" 或分钟数转换为当日分钟

    Args:
        value: "13:00" 形式的字符串或整数分钟

    Returns:
        当日分钟数
    """
    if isinstance(value, bool):
        raise ValueError(f"无效的时间: {value!r}")
    if isinstance(value, int):
        minute = value
    else:
        text = str(value).strip()
        if ":" not in text:
            minute = int(text)
        else:
            hours, minutes = text.split(":", 1)
            minute = int(hours) * 60 + int(minutes)
    if not 0 <= minute <= MINUTES_PER_DAY:
        raise ValueError(f"时间超出一天范围: {value!r}")
    return minute


def format_clock(minute: int) -> str:
    """分钟数 -> "HH:MM" """
    return f"{minute // 60:02d}:{minute % 60:02d}"


@dataclass(frozen=True)
class TaskDescriptor:
    """结构化目标：角色、所需能力、时长与地点"""
    id: str
    role: str
    capabilities: FrozenSet[str]
    duration: int = 0
    deadline: int = 18 * 60
    location: str = "home"
    action: str = "cook"
    target: str = ""

    def __post_init__(self):
        if not 0 <= self.deadline <= MINUTES_PER_DAY:
            raise ValueError(f"目标 {self.id} 的截止时间无效: {self.deadline}")


@dataclass(frozen=True)
class Arrival:
    location: str
    minute: int


@dataclass(frozen=True)
class ScenarioActor:
    """场景中的人员"""
    id: str
    qualifications: FrozenSet[str]
    origin: str
    arrival: Optional[Arrival] = None
    needs_rental: bool = False
    reroutable: bool = False

    @property
    def drives(self) -> bool:
        return "drive" in self.qualifications

    @property
    def is_flight(self) -> bool:
        return self.origin == FLIGHT_ORIGIN


@dataclass(frozen=True)
class CookingTask:
    id: str
    duration: int
    location: str
    supervised: bool = False


@dataclass(frozen=True)
class Preference:
    """
    家庭偏好

    kind 为 "prefers_driver" 时 actors = (乘客, 偏好的司机)；
    kind 为 "avoid_overlap" 时 actors 为不应同时做饭的两人。
    """
    id: str
    kind: str
    actors: Tuple[str, ...]
    priority: int = 1
    description: str = ""


@dataclass(frozen=True)
class Scenario:
    name: str
    start: int
    deadline: int
    home: str
    locations: Tuple[str, ...]
    travel: Dict[Tuple[str, str], int] = field(default_factory=dict)
    actors: Tuple[ScenarioActor, ...] = ()
    tasks: Tuple[CookingTask, ...] = ()
    objectives: Tuple[TaskDescriptor, ...] = ()
    explicit_constraints: Tuple[Constraint, ...] = ()
    preferences: Tuple[Preference, ...] = ()
    luggage_minutes: int = 0
    rental_minutes: int = 0
    augmented: bool = False

    def __post_init__(self):
        if not 0 <= self.start <= self.deadline <= MINUTES_PER_DAY:
            raise ValueError(f"场景 {self.name} 的时间窗口无效: {self.start}-{self.deadline}")

    # ---- 查询 ----

    @property
    def horizon(self) -> int:
        return self.deadline - self.start

    @property
    def flights(self) -> Dict[str, int]:
        """航班到达者 -> 落地时间"""
        return {a.id: a.arrival.minute for a in self.actors if a.is_flight and a.arrival}

    def actor(self, actor_id: str) -> ScenarioActor:
        for actor in self.actors:
            if actor.id == actor_id:
                return actor
        raise KeyError(f"未知的参与者: {actor_id}")

    def has_actor(self, actor_id: str) -> bool:
        return any(a.id == actor_id for a in self.actors)

    def task(self, task_id: str) -> CookingTask:
        for task in self.tasks:
            if task.id == task_id:
                return task
        raise KeyError(f"未知的任务: {task_id}")

    def travel_time(self, a: str, b: str) -> Optional[int]:
        """两地之间的行驶分钟数，无路线返回 None"""
        if a == b:
            return 0
        if (a, b) in self.travel:
            return self.travel[(a, b)]
        return self.travel.get((b, a))

    def ready_time(self, actor: ScenarioActor) -> int:
        """乘客可被接走的最早时间（航班到达者需先取行李）"""
        if actor.is_flight and actor.arrival:
            return actor.arrival.minute + self.luggage_minutes
        return self.start

    def pickup_location(self, actor: ScenarioActor) -> str:
        if actor.arrival is not None and actor.is_flight:
            return actor.arrival.location
        return actor.origin

    def active_preferences(self) -> Tuple[Preference, ...]:
        return self.preferences if self.augmented else ()

    # ---- 派生场景 ----

    def with_arrival(self, actor_id: str, minute: int) -> "Scenario":
        """返回某人到达时间更新后的新场景"""
        actors = []
        for actor in self.actors:
            if actor.id == actor_id:
                if actor.arrival is None:
                    raise ValueError(f"{actor_id} 没有到达信息，无法更新")
                actor = replace(actor, arrival=replace(actor.arrival, minute=minute))
            actors.append(actor)
        return replace(self, actors=tuple(actors))

    def with_start(self, minute: int) -> "Scenario":
        return replace(self, start=minute)


def empty_scenario() -> Scenario:
    return Scenario(name="empty", start=8 * 60, deadline=18 * 60, home="home", locations=("home",))


# ---------------------------------------------------------------------------
# 场景文件

class ScenarioFieldError(ScenarioParseError):
    """场景字段无效，section / item_id 指出出错的条目"""

    def __init__(self, message: str, section: str, item_id: Optional[str] = None):
        super().__init__(message)
        self.section = section
        self.item_id = item_id


def _section(data: Dict, section: str, build) -> list:
    """逐条构造某一段的条目，出错时记录段名与条目 id"""
    items = []
    for item in data.get(section, []):
        try:
            items.append(build(item))
        except (KeyError, TypeError, ValueError) as e:
            item_id = item.get("id") if isinstance(item, dict) else None
            where = f"{section}[{item_id}]" if item_id else section
            raise ScenarioFieldError(f"{where}: {e}", section, item_id) from e
    return items


def _clock_field(data: Dict, key: str, default: str) -> int:
    try:
        return parse_clock(data.get(key, default))
    except ValueError as e:
        raise ScenarioFieldError(f"{key}: {e}", key) from e


def scenario_from_dict(data: Dict) -> Scenario:
    """
    从字典构造场景

    Args:
        data: 场景 JSON 解析后的字典

    Returns:
        Scenario 对象

    Raises:
        ScenarioFieldError: 某个条目的字段缺失或非法
    """
    home = data.get("home", "home")
    deadline = _clock_field(data, "deadline", "18:00")
    start = _clock_field(data, "start", "08:00")

    def actor(item):
        arrival = None
        if item.get("arrival"):
            arrival = Arrival(item["arrival"]["location"], parse_clock(item["arrival"]["time"]))
        return ScenarioActor(
            id=item["id"],
            qualifications=frozenset(item.get("qualifications", [])),
            origin=item.get("origin", home),
            arrival=arrival,
            needs_rental=bool(item.get("needs_rental", False)),
            reroutable=bool(item.get("reroutable", False)),
        )

    def objective(o):
        return TaskDescriptor(
            id=o["id"],
            role=o["role"],
            capabilities=frozenset(o.get("capabilities", [])),
            duration=int(o.get("duration", 0)),
            deadline=parse_clock(o.get("deadline", deadline)),
            location=o.get("location", home),
            action=o.get("action", "cook"),
            target=o.get("target", ""),
        )

    travel: Dict[Tuple[str, str], int] = {
        (a, b): minutes
        for a, b, minutes in _section(data, "travel", lambda t: (t["from"], t["to"], int(t["minutes"])))
    }
    tasks = _section(data, "tasks", lambda t: CookingTask(
        t["id"], int(t["duration"]), t.get("location", home), bool(t.get("supervised", False))))
    preferences = _section(data, "preferences", lambda p: Preference(
        p["id"], p["kind"], tuple(p["actors"]), int(p.get("priority", 1)), p.get("description", "")))

    return Scenario(
        name=data.get("name", "scenario"),
        start=start,
        deadline=deadline,
        home=home,
        locations=tuple(data.get("locations", [home])),
        travel=travel,
        actors=tuple(_section(data, "actors", actor)),
        tasks=tuple(tasks),
        objectives=tuple(_section(data, "objectives", objective)),
        explicit_constraints=tuple(_section(data, "constraints", constraint_from_dict)),
        preferences=tuple(preferences),
        luggage_minutes=int(data.get("luggage_minutes", 0)),
        rental_minutes=int(data.get("rental_minutes", 0)),
        augmented=bool(data.get("augmented", False)),
    )


def _field_line(text: str, section: str, item_id: Optional[str]) -> Optional[int]:
    """出错条目在文件中的行号：优先定位条目的 id，否则定位段名"""
    start = text.find(json.dumps(section))
    if start < 0:
        return None
    position = start
    if item_id:
        found = re.compile(r'"id"\s*:\s*' + re.escape(json.dumps(item_id))).search(text, start)
        if found:
            position = found.start()
    return text.count("\n", 0, position) + 1


def load_scenario(file_path: Union[str, Path]) -> Scenario:
    """
    从 JSON 文件加载场景

    Raises:
        FileNotFoundError: 文件不存在
        ScenarioParseError: JSON 语法错误或字段缺失
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"场景文件不存在: {path}")

    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"场景文件格式错误: {e.msg}", line=e.lineno) from e

    if not isinstance(data, dict):
        raise ScenarioParseError("场景文件顶层应为对象", line=1)
    try:
        scenario = scenario_from_dict(data)
    except ScenarioFieldError as e:
        raise ScenarioParseError(f"场景字段无效: {e}", line=_field_line(text, e.section, e.item_id)) from e
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioParseError(f"场景字段无效: {e}") from e

    logger.info(f"场景加载成功: {scenario.name}，共 {len(scenario.actors)} 名参与者")
    return scenario


# 感恩节场景的事实
_THANKSGIVING = {
    "name": "thanksgiving",
    "start": "08:00",
    "deadline": "18:00",
    "home": "home",
    "locations": ["home", "airport", "grandma", "new_york"],
    "travel": [
        {"from": "home", "to": "airport", "minutes": 60},
        {"from": "airport", "to": "grandma", "minutes": 60},
        {"from": "home", "to": "grandma", "minutes": 30},
        {"from": "new_york", "to": "home", "minutes": 240},
        {"from": "new_york", "to": "airport", "minutes": 240},
    ],
    "actors": [
        {"id": "Sarah", "origin": "home",
         "qualifications": ["cook", "drive", "airport_pickup", "local_pickup", "supervise", "oven_watch"]},
        {"id": "James", "origin": "flight", "arrival": {"location": "airport", "time": "13:00"},
         "needs_rental": True,
         "qualifications": ["drive", "airport_pickup", "local_pickup", "supervise", "oven_watch"]},
        {"id": "Emily", "origin": "flight", "arrival": {"location": "airport", "time": "14:30"},
         "qualifications": ["supervise", "oven_watch"]},
        {"id": "Michael", "origin": "new_york", "arrival": {"location": "home", "time": "15:00"},
         "reroutable": True,
         "qualifications": ["drive", "airport_pickup", "local_pickup", "supervise", "oven_watch"]},
        {"id": "Grandma", "origin": "grandma",
         "qualifications": ["cook", "supervise", "oven_watch"]},
    ],
    "tasks": [
        {"id": "turkey", "duration": 240, "location": "home", "supervised": True},
        {"id": "side_dishes", "duration": 120, "location": "home"},
    ],
    "objectives": [
        {"id": "turkey", "role": "cook", "capabilities": ["cook"], "duration": 240,
         "action": "cook", "target": "turkey"},
        {"id": "side_dishes", "role": "cook", "capabilities": ["cook"], "duration": 120,
         "action": "cook", "target": "side_dishes"},
        {"id": "supervise_turkey", "role": "supervisor", "capabilities": ["supervise", "oven_watch"],
         "duration": 240, "action": "supervise", "target": "turkey"},
        {"id": "pickup_Emily", "role": "driver1", "capabilities": ["drive", "airport_pickup"],
         "duration": 60, "location": "airport", "action": "pickup", "target": "Emily"},
        {"id": "pickup_Grandma", "role": "driver2", "capabilities": ["drive", "local_pickup"],
         "duration": 30, "location": "grandma", "action": "pickup", "target": "Grandma"},
    ],
    "constraints": [
        {"id": "rental", "kind": "resource", "rule": "R5",
         "params": {"actors": ["James"]}},
        {"id": "emily_pickup", "kind": "temporal", "rule": "R4",
         "params": {"passenger": "Emily", "tasks": ["pickup_Emily", "turkey"], "min_gap": 0}},
        {"id": "turkey_supervision", "kind": "safety", "rule": "R2",
         "params": {"task": "turkey", "tasks": ["turkey", "supervise_turkey"], "resource": "oven"}},
        {"id": "side_dishes", "kind": "temporal", "rule": "R3",
         "params": {"task": "side_dishes"}},
        {"id": "travel_home_airport", "kind": "spatial", "rule": "R6",
         "params": {"route": "home-airport", "tasks": ["pickup_Emily", "pickup_Grandma"]}},
        {"id": "travel_airport_grandma", "kind": "spatial", "rule": "R6",
         "params": {"route": "airport-grandma", "tasks": ["pickup_Emily", "pickup_Grandma"]}},
        {"id": "travel_home_grandma", "kind": "spatial", "rule": "R6",
         "params": {"route": "home-grandma", "tasks": ["pickup_Grandma", "turkey"]}},
    ],
    "preferences": [
        {"id": "grandma_driver", "kind": "prefers_driver", "actors": ["Grandma", "Michael"],
         "priority": 2, "description": "Grandma prefers Michael to pick her up"},
        {"id": "no_joint_cooking", "kind": "avoid_overlap", "actors": ["Sarah", "Grandma"],
         "priority": 1, "description": "Sarah and Grandma prefer not to cook at the same time"},
    ],
    "luggage_minutes": 0,
    "rental_minutes": 0,
    "augmented": False,
}

AUGMENTED_LUGGAGE_MINUTES = 30
AUGMENTED_RENTAL_MINUTES = 30
DELAYED_LANDING = 16 * 60
DELAY_DETECTED_AT = 10 * 60


def thanksgiving_dict() -> Dict:
    """感恩节基线场景的 JSON 结构（深拷贝）"""
    return json.loads(json.dumps(_THANKSGIVING))


def builtin_thanksgiving(augmented: bool = False, delayed: bool = False) -> Scenario:
    """
    内置感恩节场景

    Args:
        augmented: 是否包含补充依赖（行李、租车、家庭偏好）
        delayed: 是否为航班延误变体（James 16:00 落地，10:00 获知）
    """
    scenario = scenario_from_dict(thanksgiving_dict())
    if augmented:
        scenario = replace(scenario, luggage_minutes=AUGMENTED_LUGGAGE_MINUTES,
                           rental_minutes=AUGMENTED_RENTAL_MINUTES, augmented=True)
    if delayed:
        scenario = scenario.with_arrival("James", DELAYED_LANDING).with_start(DELAY_DETECTED_AT)
    return scenario


BUILTIN_SCENARIOS = {
    "baseline": (False, False),
    "augmented": (True, False),
    "delayed": (False, True),
    "augmented-delayed": (True, True),
}


def resolve_scenario(spec: str) -> Scenario:
    """解析 CLI 的 --scenario 参数：文件路径或 builtin:<名称>"""
    if spec.startswith("builtin:"):
        key = spec.split(":", 1)[1]
        if key not in BUILTIN_SCENARIOS:
            raise ValueError(f"未知的内置场景: {key}，可选: {', '.join(BUILTIN_SCENARIOS)}")
        return builtin_thanksgiving(*BUILTIN_SCENARIOS[key])
    return load_scenario(spec)


# ---------------------------------------------------------------------------
# 调度

@dataclass(frozen=True)
class ScheduleEntry:
    start: int
    end: int
    task: str
    assignees: Tuple[str, ...]

    @property
    def kind(self) -> str:
        return self.task.split(":", 1)[0]

    @property
    def is_drive(self) -> bool:
        return self.kind == "drive"

    @property
    def route(self) -> Tuple[str, str]:
        _, origin, destination = self.task.split(":")
        return origin, destination

    @property
    def driver(self) -> str:
        return self.assignees[0]

    @property
    def occupying(self) -> bool:
        return self.is_drive or self.kind in OCCUPYING_TASKS

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Schedule:
    entries: Tuple[ScheduleEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def sorted(self) -> "Schedule":
        return Schedule(tuple(sorted(self.entries, key=lambda e: (e.start, e.end, e.task, e.assignees))))

    def for_actor(self, actor_id: str) -> List[ScheduleEntry]:
        return [e for e in self.entries if actor_id in e.assignees]

    def by_kind(self, kind: str) -> List[ScheduleEntry]:
        return [e for e in self.entries if e.kind == kind]

    def dinner(self) -> Optional[ScheduleEntry]:
        dinners = self.by_kind("dinner")
        return dinners[0] if dinners else None

    def to_rows(self) -> List[Dict]:
        return [
            {"start": format_clock(e.start), "end": format_clock(e.end), "task": e.task,
             "assignees": ";".join(e.assignees)}
            for e in self.entries
        ]


def validate_task_code(task: str) -> None:
    """检查任务码是否属于已知集合"""
    parts = task.split(":")
    if parts[0] == "drive":
        if len(parts) != 3 or not parts[1] or not parts[2]:
            raise ScheduleFormatError(f"行驶任务格式应为 drive:FROM:TO，实际为 {task}")
        return
    if task not in KNOWN_TASKS:
        raise ScheduleFormatError(f"未知的任务码: {task}")


def make_entry(start: Union[str, int], end: Union[str, int], task: str,
               assignees: Iterable[str]) -> ScheduleEntry:
    validate_task_code(task)
    entry = ScheduleEntry(parse_clock(start), parse_clock(end), task, tuple(assignees))
    if entry.end < entry.start:
        raise ScheduleFormatError(f"条目结束早于开始: {task} {start}-{end}")
    if not entry.assignees:
        raise ScheduleFormatError(f"条目没有执行人: {task}")
    return entry


def load_schedule_csv(file_path: Union[str, Path], scenario: Optional[Scenario] = None) -> Schedule:
    """
    读取 start,end,task,assignees 格式的调度 CSV

    Args:
        file_path: CSV 路径
        scenario: 用于把 "all" 展开为全部参与者

    Returns:
        Schedule 对象
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"调度文件不存在: {path}")

    entries = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            try:
                names = [n.strip() for n in row["assignees"].split(";") if n.strip()]
                if names == ["all"]:
                    if scenario is None:
                        raise ScheduleFormatError("assignees 为 all 时需要提供场景")
                    names = [a.id for a in scenario.actors]
                entries.append(make_entry(row["start"].strip(), row["end"].strip(),
                                          row["task"].strip(), names))
            except ScheduleFormatError:
                raise
            except (KeyError, AttributeError, ValueError) as e:
                raise ScenarioParseError(f"调度行无效: {e}", line=reader.line_num) from e

    logger.info(f"调度加载成功: {path.name}，共 {len(entries)} 条")
    return Schedule(tuple(entries))


def schedule_from_rows(rows: Iterable[Dict], scenario: Optional[Scenario] = None) -> Schedule:
    """由 to_rows() 形式的字典列表构造调度，assignees 可为列表或以 ; 分隔的字符串"""
    entries = []
    for row in rows:
        names = row["assignees"]
        if isinstance(names, str):
            names = [n.strip() for n in names.split(";") if n.strip()]
        if list(names) == ["all"]:
            if scenario is None:
                raise ScheduleFormatError("assignees 为 all 时需要提供场景")
            names = [a.id for a in scenario.actors]
        entries.append(make_entry(row["start"], row["end"], row["task"], names))
    return Schedule(tuple(entries))
