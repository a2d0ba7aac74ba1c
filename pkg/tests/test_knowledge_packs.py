"""
常识知识包测试
"""

import pytest

from src.knowledge_packs import (
    DEFAULT_PACKS, LUGGAGE_MINUTES, RENTAL_MINUTES, UnknownPackError, apply_constraints, emit_constraints,
)
from src.scenario import builtin_thanksgiving


def test_airport_pack(baseline):
    emitted = emit_constraints(baseline, ["airport"])
    assert [c.id for c in emitted] == ["luggage_James", "luggage_Emily", "rental_James"]
    assert all(c.origin == "implicit" and c.hard for c in emitted)
    assert emitted[0].params["minutes"] == LUGGAGE_MINUTES
    assert emitted[2].rule == "R5"


def test_household_pack(baseline):
    emitted = {c.id: c for c in emit_constraints(baseline, ["household"])}
    assert set(emitted) == {"supervision_continuity_turkey", "no_traffic_delay",
                            "pref_grandma_driver", "pref_no_joint_cooking"}
    assert emitted["supervision_continuity_turkey"].params["concurrent"] == ["side_dishes"]
    assert emitted["no_traffic_delay"].params["factor"] == 1.0

    driver = emitted["pref_grandma_driver"]
    assert (driver.rule, driver.hard, driver.priority) == ("R10", False, 2)
    assert driver.params == {"passenger": "Grandma", "driver": "Michael"}
    cooking = emitted["pref_no_joint_cooking"]
    assert (cooking.rule, cooking.hard, cooking.priority) == ("R11", False, 1)


def test_emission_is_deterministic(baseline):
    first = emit_constraints(baseline, DEFAULT_PACKS)
    second = emit_constraints(baseline, DEFAULT_PACKS)
    assert first == second


def test_existing_ids_are_skipped(baseline):
    emitted = emit_constraints(baseline, DEFAULT_PACKS)
    assert emit_constraints(baseline, DEFAULT_PACKS, [c.id for c in emitted]) == []


def test_unknown_pack(baseline):
    with pytest.raises(UnknownPackError, match="kitchen"):
        emit_constraints(baseline, ["airport", "kitchen"])


def test_apply_constraints_reproduces_augmented_scenario(baseline):
    augmented = apply_constraints(baseline, emit_constraints(baseline, DEFAULT_PACKS))
    assert augmented.luggage_minutes == LUGGAGE_MINUTES
    assert augmented.rental_minutes == RENTAL_MINUTES
    assert augmented == builtin_thanksgiving(augmented=True)


def test_airport_only_keeps_preferences_inactive(baseline):
    scenario = apply_constraints(baseline, emit_constraints(baseline, ["airport"]))
    assert scenario.luggage_minutes == LUGGAGE_MINUTES
    assert scenario.active_preferences() == ()
