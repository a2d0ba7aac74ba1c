"""
常识知识包
以可审计的规则代替常识智能体，为规划问题补充隐式约束
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Sequence, Tuple

from .scenario import Scenario
from .workflow import Constraint

logger = logging.getLogger(__name__)

LUGGAGE_MINUTES = 30
RENTAL_MINUTES = 30


class UnknownPackError(ValueError):
    """知识包 id 无法解析"""


@dataclass(frozen=True)
class PackRule:
    id: str
    description: str
    emit: Callable[[Scenario], List[Constraint]]


@dataclass(frozen=True)
class KnowledgePack:
    id: str
    rules: Tuple[PackRule, ...]

    def emit(self, scenario: Scenario) -> List[Constraint]:
        constraints: List[Constraint] = []
        for rule in self.rules:
            constraints.extend(rule.emit(scenario))
        return constraints


def _implicit(cid: str, kind: str, rule: str, params: dict, description: str,
              hard: bool = True, priority: int = 5) -> Constraint:
    return Constraint(id=cid, origin="implicit", kind=kind, hard=hard, priority=priority,
                      rule=rule, params=params, description=description)


# ---- airport ----

def _luggage(scenario: Scenario) -> List[Constraint]:
    return [
        _implicit(f"luggage_{actor_id}", "temporal", "R4",
                  {"actor": actor_id, "minutes": LUGGAGE_MINUTES, "min_gap": LUGGAGE_MINUTES},
                  f"{actor_id} 落地后需要 {LUGGAGE_MINUTES} 分钟取行李")
        for actor_id in scenario.flights
    ]


def _rental(scenario: Scenario) -> List[Constraint]:
    return [
        _implicit(f"rental_{a.id}", "resource", "R5", {"actor": a.id, "minutes": RENTAL_MINUTES},
                  f"{a.id} 租车需要 {RENTAL_MINUTES} 分钟")
        for a in scenario.actors if a.is_flight and a.needs_rental
    ]


# ---- household ----

def _supervision_continuity(scenario: Scenario) -> List[Constraint]:
    others = [t.id for t in scenario.tasks if not t.supervised]
    return [
        _implicit(f"supervision_continuity_{t.id}", "safety", "R9",
                  {"task": t.id, "concurrent": others},
                  f"看守 {t.id} 的人可以同时准备其它菜")
        for t in scenario.tasks if t.supervised
    ]


def _no_traffic_delay(scenario: Scenario) -> List[Constraint]:
    if not scenario.travel:
        return []
    return [_implicit("no_traffic_delay", "spatial", "R6", {"factor": 1.0, "route": "*"},
                      "路程时间按标称值计算，不考虑堵车")]


def _preferences(scenario: Scenario) -> List[Constraint]:
    constraints = []
    for pref in scenario.preferences:
        if pref.kind == "prefers_driver":
            passenger, driver = pref.actors
            constraints.append(_implicit(f"pref_{pref.id}", "preference", "R10",
                                         {"passenger": passenger, "driver": driver},
                                         pref.description or f"{passenger} 希望由 {driver} 接送",
                                         hard=False, priority=pref.priority))
        elif pref.kind == "avoid_overlap":
            constraints.append(_implicit(f"pref_{pref.id}", "preference", "R11",
                                         {"actors": list(pref.actors)},
                                         pref.description or f"{' 与 '.join(pref.actors)} 不同时做饭",
                                         hard=False, priority=pref.priority))
        else:
            logger.warning(f"忽略未知的偏好类型: {pref.kind}")
    return constraints


PACKS = {
    "airport": KnowledgePack("airport", (
        PackRule("luggage", "航班到达后取行李 30 分钟", _luggage),
        PackRule("rental", "租车 30 分钟", _rental),
    )),
    "household": KnowledgePack("household", (
        PackRule("supervision_continuity", "看守烤箱时可以准备配菜", _supervision_continuity),
        PackRule("no_traffic_delay", "无交通延误", _no_traffic_delay),
        PackRule("preferences", "家庭偏好转为软约束", _preferences),
    )),
}

DEFAULT_PACKS = ("airport", "household")


def resolve_packs(pack_ids: Iterable[str]) -> List[KnowledgePack]:
    packs = []
    for pack_id in pack_ids:
        if pack_id not in PACKS:
            raise UnknownPackError(f"未知的知识包: {pack_id}，可选: {', '.join(PACKS)}")
        packs.append(PACKS[pack_id])
    return packs


def emit_constraints(scenario: Scenario, pack_ids: Sequence[str],
                     existing_ids: Iterable[str] = ()) -> List[Constraint]:
    """
    按知识包顺序发出隐式约束

    Args:
        scenario: 场景事实
        pack_ids: 知识包 id 列表
        existing_ids: 已存在的约束 id，这些 id 不会再次发出

    Returns:
        新增的隐式约束
    """
    seen = set(existing_ids)
    emitted = []
    for pack in resolve_packs(pack_ids):
        for c in pack.emit(scenario):
            if c.id in seen:
                continue
            seen.add(c.id)
            emitted.append(c)
    return emitted


def apply_constraints(scenario: Scenario, constraints: Iterable[Constraint]) -> Scenario:
    """把隐式约束的参数写入场景：行李、租车时长以及家庭偏好"""
    luggage, rental = scenario.luggage_minutes, scenario.rental_minutes
    augmented = scenario.augmented
    for c in constraints:
        if c.id.startswith("luggage_"):
            luggage = max(luggage, int(c.params.get("minutes", LUGGAGE_MINUTES)))
        elif c.id.startswith("rental_"):
            rental = max(rental, int(c.params.get("minutes", RENTAL_MINUTES)))
        elif c.kind == "preference":
            augmented = True
    return replace(scenario, luggage_minutes=luggage, rental_minutes=rental, augmented=augmented)
