"""
简单时间网络测试
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.stn import ORIGIN, STN, schedule_to_stn, stn_consistent


def bellman_ford_consistent(points, constraints):
    """从虚拟源点出发做 Bellman-Ford，第 n 轮仍能松弛即存在负环"""
    dist = {p: 0 for p in points}
    for _ in range(len(points)):
        changed = False
        for u, v, w in constraints:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return True
    return not any(dist[u] + w < dist[v] for u, v, w in constraints)


def test_empty_network_is_consistent():
    assert stn_consistent(STN())
    assert stn_consistent(STN(["a", "b"]))


def test_negative_cycle():
    stn = STN(["a", "b"])
    stn.add_constraint("a", "b", 5)
    stn.add_constraint("b", "a", -6)
    assert not stn_consistent(stn)


def test_tight_cycle_is_consistent():
    stn = STN(["a", "b"])
    stn.add_interval("a", "b", 5, 5)
    assert stn_consistent(stn)


def test_negative_self_loop():
    stn = STN(["a"])
    stn.add_constraint("a", "a", -1)
    assert not stn_consistent(stn)


def test_parallel_constraints_keep_tightest():
    stn = STN(["a", "b"])
    stn.add_constraint("a", "b", 10)
    stn.add_constraint("a", "b", 3)
    assert stn.distance_graph()["a"]["b"]["weight"] == 3


def test_open_interval_adds_one_side():
    stn = STN(["a", "b"])
    stn.add_interval("a", "b", None, 7)
    stn.add_interval("a", "b", 2, None)
    assert stn.constraints == [("a", "b", 7), ("b", "a", -2)]


def test_point_errors():
    stn = STN(["a"])
    with pytest.raises(ValueError):
        stn.add_point("a")
    with pytest.raises(ValueError):
        stn.add_constraint("a", "z", 1)
    with pytest.raises(ValueError):
        STN(["a", "a"])


@given(st.lists(st.integers(min_value=0, max_value=600), min_size=2, max_size=8), st.data())
def test_constraints_satisfied_by_some_assignment_are_consistent(times, data):
    points = [f"p{i}" for i in range(len(times))]
    stn = STN(list(points))
    pairs = data.draw(st.lists(st.tuples(st.integers(0, len(times) - 1), st.integers(0, len(times) - 1)),
                               max_size=20))
    for a, b in pairs:
        slack = data.draw(st.integers(min_value=0, max_value=30))
        stn.add_constraint(points[a], points[b], times[b] - times[a] + slack)
    assert stn_consistent(stn)


def test_valid_schedule_is_consistent(augmented, load_fixture):
    stn = schedule_to_stn(augmented, load_fixture("deepseek_sequential.csv", augmented))
    assert ORIGIN in stn.points
    assert stn_consistent(stn)


def test_short_drive_makes_pinned_network_inconsistent(baseline, load_fixture):
    schedule = load_fixture("deepseek_case_study.csv", baseline)
    # home->grandma 需要 30 分钟，但 Michael 15:15 就开始返程
    assert not stn_consistent(schedule_to_stn(baseline, schedule))
    assert stn_consistent(schedule_to_stn(baseline, schedule, pin_starts=False))


def test_agrees_with_bellman_ford_on_random_networks():
    rng = np.random.default_rng(12)
    verdicts = []
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        points = [f"p{i}" for i in range(n)]
        stn = STN(list(points))
        for _ in range(int(rng.integers(0, 3 * n + 1))):
            u, v = (str(x) for x in rng.choice(points, size=2))
            stn.add_constraint(u, v, int(rng.integers(-20, 41)))
        expected = bellman_ford_consistent(points, stn.constraints)
        assert stn_consistent(stn) == expected, stn.constraints
        verdicts.append(expected)
    assert any(verdicts) and not all(verdicts)
