"""
智能体仓库测试
"""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings, strategies as st

from src.agent_repository import (
    COMMON_AGENTS, MAX_CONTEXT_WINDOW, AgentRepository, AgentSpec, RegistrationError, Requirement,
    apply_assignment, capability_distance, default_repository, edge_requirement, load_catalog, node_requirement,
)
from src.workflow import DependencyEdge, RoleNode, Workflow


def spec(agent_id, *tags, **kwargs):
    return AgentSpec(agent_id, frozenset(tags), **kwargs)


class TestRegistration:
    def test_seed_common_agents(self):
        repo = AgentRepository()
        seeded = repo.seed_common_agents()
        assert len(repo) == 10
        assert [a.registration_seq for a in seeded] == list(range(1, 11))
        assert [a.id for a in repo.agents()] == [agent_id for agent_id, _ in COMMON_AGENTS]

    def test_seeding_twice_fails(self):
        repo = default_repository()
        with pytest.raises(RegistrationError):
            repo.seed_common_agents()

    def test_duplicate_id(self):
        repo = AgentRepository()
        repo.register(spec("a", "x"))
        with pytest.raises(RegistrationError, match="已登记"):
            repo.register(spec("a", "y"))

    def test_context_window_cap(self):
        repo = AgentRepository()
        with pytest.raises(RegistrationError):
            repo.register(spec("big", "x", context_window=MAX_CONTEXT_WINDOW + 1))
        assert len(repo) == 0

    def test_invalid_spec_fields(self):
        with pytest.raises(ValueError):
            spec("a", "x", rating=5.5)
        with pytest.raises(ValueError):
            spec("a", "x", agent_type="expert")
        with pytest.raises(ValueError):
            spec("a", "x", efficiency_class="heavy")

    def test_concurrent_registration_sequence_has_no_gaps(self):
        repo = AgentRepository()
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda i: repo.register(spec(f"agent{i}", "x")), range(50)))
        assert sorted(a.registration_seq for a in repo.agents()) == list(range(1, 51))

    def test_concurrent_duplicate_registers_once(self):
        repo = AgentRepository()

        def attempt(_):
            try:
                repo.register(spec("same", "x"))
                return True
            except RegistrationError:
                return False

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(attempt, range(20)))
        assert results.count(True) == 1
        assert len(repo) == 1


class TestMatching:
    def test_capability_distance(self):
        assert capability_distance({"a", "b", "c"}, {"b", "z"}) == 2
        assert capability_distance({"a"}, {"a"}) == 0

    def test_exact_match_first(self):
        repo = default_repository()
        best, distance = repo.best(Requirement(frozenset({"temporal", "timing"})))
        assert best.id == "Temporal Agent"
        assert distance == 0

    def test_candidates_cover_at_least_one_tag(self):
        repo = default_repository()
        ranked = repo.match(Requirement(frozenset({"safety", "oven_watch"})))
        assert [a.id for a in ranked] == ["Compliance and Safety Agent"]

    def test_rating_breaks_distance_tie(self):
        repo = AgentRepository()
        repo.register(spec("low", "x", rating=1.0))
        repo.register(spec("high", "x", rating=4.0))
        assert [a.id for a in repo.match(Requirement(frozenset({"x", "y"})))] == ["high", "low"]

    def test_registration_order_breaks_full_tie(self):
        repo = AgentRepository()
        repo.register(spec("first", "x"))
        repo.register(spec("second", "x"))
        assert repo.best(Requirement(frozenset({"x"})))[0].id == "first"

    def test_protocol_must_match(self):
        repo = AgentRepository()
        repo.register(spec("other", "x", protocol=("text", "text")))
        assert repo.match(Requirement(frozenset({"x"}))) == []

    def test_empty_requirement(self):
        with pytest.raises(ValueError):
            Requirement(frozenset())

    def test_node_requirement_includes_role_tracking(self):
        node = RoleNode("driver1", "driver1", frozenset({"drive", "airport_pickup"}))
        assert node_requirement(node).required == {"role_tracking", "drive", "airport_pickup"}


class TestAssignment:
    @pytest.fixture
    def workflow(self):
        nodes = (
            RoleNode("cook", "cook", frozenset({"cook"})),
            RoleNode("driver1", "driver1", frozenset({"drive", "airport_pickup"})),
        )
        edges = (
            DependencyEdge("t", "driver1", "cook", "temporal", {"min_gap": 0}),
            DependencyEdge("s", "driver1", "cook", "safety"),
            DependencyEdge("d", "cook", "driver1", "data"),
        )
        return Workflow(nodes, edges)

    def test_assign_nodes_and_edges(self, workflow):
        assignment = default_repository().assign(workflow)
        assert assignment.node_map == {"cook": "Role Manager Agent", "driver1": "Role Manager Agent"}
        assert assignment.edge_map == {"t": "Temporal Agent", "s": "Compliance and Safety Agent"}
        # cook: {role_tracking, cook} 距离 1；driver1: 距离 2
        assert assignment.total_distance == 3

    def test_unmatched_edge_is_a_defect(self, workflow):
        assignment = default_repository().assign_edge_agents(workflow)
        assert assignment.defects == ("d",)

    def test_apply_assignment(self, workflow):
        assignment = default_repository().assign(workflow)
        updated = apply_assignment(workflow, assignment)
        assert updated.node("cook").node_agent == "Role Manager Agent"
        assert updated.edge("t").edge_agent == "Temporal Agent"
        assert updated.edge("d").edge_agent is None
        assert workflow.node("cook").node_agent is None


class TestCatalog:
    def test_bundled_catalog_matches_common_agents(self, data_dir):
        specs = load_catalog(data_dir / "agents" / "common_agents.json")
        assert [(s.id, s.capabilities) for s in specs] == [
            (agent_id, frozenset(tags)) for agent_id, tags in COMMON_AGENTS
        ]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_catalog(tmp_path / "none.json")

    def test_not_a_list(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps({"id": "x"}), encoding="utf-8")
        with pytest.raises(ValueError):
            load_catalog(path)

    def test_optional_fields(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps([{"id": "Route Planner", "capabilities": ["route"],
                                     "agent_type": "specialized", "rating": 4.5}]), encoding="utf-8")
        loaded = load_catalog(path)[0]
        assert loaded.agent_type == "specialized"
        assert loaded.rating == 4.5
        assert loaded.registration_seq is None


TAGS = ("role_tracking", "cook", "drive", "supervise", "temporal", "timing", "safety", "oven_watch", "spatial")

agent_lists = st.lists(
    st.tuples(st.frozensets(st.sampled_from(TAGS), max_size=4), st.sampled_from([0.0, 2.5, 5.0]), st.booleans()),
    min_size=1, max_size=6,
)
workflows = st.tuples(
    st.lists(st.frozensets(st.sampled_from(["cook", "drive", "supervise"]), min_size=1, max_size=2),
             min_size=1, max_size=3),
    st.lists(st.sampled_from(["temporal", "spatial", "safety"]), max_size=2),
)


def build_repository(agents):
    repo = AgentRepository()
    for i, (tags, rating, monitor) in enumerate(agents):
        protocol = ("workflow_state", "monitor_report") if monitor else ("text", "text")
        repo.register(spec(f"agent-{i}", *tags, rating=rating, protocol=protocol))
    return repo


def build_workflow(qualifications, kinds):
    nodes = tuple(RoleNode(f"n{i}", f"n{i}", q) for i, q in enumerate(qualifications))
    if len(nodes) < 2:
        kinds = []
    edges = tuple(DependencyEdge(f"e{i}", nodes[0].id, nodes[-1].id, kind, {"min_gap": 0, "route": "r"})
                  for i, kind in enumerate(kinds))
    return Workflow(nodes, edges)


class TestAssignmentProperties:
    @settings(max_examples=80, deadline=None)
    @given(agent_lists, st.frozensets(st.sampled_from(TAGS), min_size=1, max_size=3))
    def test_match_order_is_deterministic(self, agents, required):
        requirement = Requirement(required)
        first = build_repository(agents)
        ranked = first.match(requirement)
        assert first.match(requirement) == ranked
        assert [a.id for a in build_repository(agents).match(requirement)] == [a.id for a in ranked]
        keys = [(capability_distance(required, a.capabilities), -a.rating, a.registration_seq) for a in ranked]
        assert keys == sorted(keys)

    @settings(max_examples=80, deadline=None)
    @given(agent_lists, workflows)
    def test_assignment_matches_brute_force_minimum(self, agents, shape):
        repo = build_repository(agents)
        workflow = build_workflow(*shape)
        assignment = repo.assign(workflow)

        requirements = [(n.id, node_requirement(n)) for n in workflow.nodes]
        requirements += [(e.id, edge_requirement(e)) for e in workflow.edges]
        options = []
        for element, requirement in requirements:
            candidates = repo.match(requirement)
            if candidates:
                options.append([(a.id, capability_distance(requirement.required, a.capabilities))
                                for a in candidates])
            else:
                assert element in assignment.defects

        best_total = min((sum(d for _, d in combo) for combo in itertools.product(*options)), default=0)
        assert assignment.total_distance == best_total
        chosen = {**assignment.node_map, **assignment.edge_map}
        for element, requirement in requirements:
            if element in chosen:
                assert chosen[element] == repo.match(requirement)[0].id
