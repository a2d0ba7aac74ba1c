"""
消息协议与服务端智能体测试
"""

import asyncio
import json

import pytest

from src.agent_repository import RegistrationError
from src.messaging import (
    AgentRegistry, EngineBridgeAgent, HelloAgent, Message, MessageType, RegistrationRequest, UnknownAgentError,
    create_agent, route_priority,
)
from src.text_generator import MOCK_RESPONSE, MockTextGenerator, create_text_generator
from src.tsp_solvers import CAMPUS5


def task(content, target="engine", priority=1):
    return Message(source_id="client", target_id=target, message_type=MessageType.TASK,
                   content=content, priority=priority)


@pytest.fixture
def engine():
    return EngineBridgeAgent("engine", ["engine"], MockTextGenerator())


class TestHelloAgent:
    async def test_greets(self):
        agent = HelloAgent("a1", ["greet"], MockTextGenerator())
        reply = await agent.process_message(
            Message(source_id="client", target_id="a1", message_type=MessageType.HELLO))
        assert reply.message_type == MessageType.RESPONSE
        assert reply.target_id == "client"
        assert reply.content == "Hello client, I am a1"

    async def test_rejects_tasks(self):
        agent = HelloAgent("a1", [], MockTextGenerator())
        reply = await agent.process_message(task("anything", target="a1"))
        assert reply.message_type == MessageType.ERROR
        assert reply.content == "Unsupported message type"

    async def test_announce(self):
        hello = await HelloAgent("a1", ["greet"], MockTextGenerator()).hello()
        assert hello.message_type == MessageType.HELLO
        assert "greet" in hello.content


class TestEngineBridge:
    async def test_tsp(self, engine):
        reply = await engine.process_message(task({"op": "tsp", "matrix": CAMPUS5}))
        assert reply.message_type == MessageType.RESPONSE
        assert reply.content["length"] == 24
        assert reply.content["tour"].startswith("A-")

    async def test_json_string_content(self, engine):
        reply = await engine.process_message(task(json.dumps({"op": "tsp", "matrix": CAMPUS5, "algo": "nn"})))
        assert reply.content["length"] == 24

    async def test_generate(self, engine):
        reply = await engine.process_message(task({"op": "generate", "prompt": "hi"}))
        assert reply.content == {"text": MOCK_RESPONSE}
        assert engine.generator.calls == 1

    async def test_check(self, engine, augmented, load_fixture):
        rows = load_fixture("deepseek_sequential.csv", augmented).to_rows()
        reply = await engine.process_message(task({"op": "check", "scenario": "builtin:augmented", "schedule": rows}))
        assert reply.content["feasible"] is True
        assert reply.content["violations"] == []

    async def test_check_reports_violations(self, engine, baseline, load_fixture):
        rows = load_fixture("deepseek_case_study.csv", baseline).to_rows()
        reply = await engine.process_message(task({"op": "check", "scenario": "builtin:baseline", "schedule": rows}))
        assert reply.content["feasible"] is False
        assert any(v.startswith("R6") for v in reply.content["violations"])

    async def test_plan(self, engine):
        reply = await engine.process_message(task({"op": "plan", "scenario": "builtin:baseline"}))
        assert reply.content["feasible"] is True
        assert set(reply.content["mapping"]) == {"cook", "supervisor", "driver1", "driver2"}

    @pytest.mark.parametrize("content", [
        "{not json",
        {"matrix": CAMPUS5},
        {"op": "dance"},
        {"op": "tsp"},
        {"op": "tsp", "matrix": [[0, 1], [1, 0]], "algo": "tabu"},
        {"op": "tsp", "matrix": [["a", "b"], ["c", "d"]]},
        {"op": "tsp", "matrix": [[0, None], [1, 0]]},
        {"op": "tsp", "matrix": [[0, 1], [1, 0]], "seed": None},
        {"op": "tsp", "matrix": [[0, 1], [1, 0]], "seed": "abc"},
        {"op": "check", "scenario": "builtin:moon"},
    ])
    async def test_bad_payload(self, engine, content):
        reply = await engine.process_message(task(content))
        assert reply.message_type == MessageType.ERROR

    async def test_priority_is_echoed(self, engine):
        reply = await engine.process_message(task({"op": "generate"}, priority=3))
        assert reply.priority == 3


def test_create_agent():
    assert isinstance(create_agent(RegistrationRequest(agent_id="e", capabilities=["engine"])), EngineBridgeAgent)
    assert isinstance(create_agent(RegistrationRequest(agent_id="h")), HelloAgent)


def test_generator_factory():
    assert isinstance(create_text_generator(), MockTextGenerator)
    assert create_text_generator({"type": "mock", "response": "ok"}).response == "ok"
    with pytest.raises(ValueError):
        create_text_generator({"type": "llama"})


def test_route_priority_is_stable():
    messages = [task(i, priority=p) for i, p in enumerate([1, 3, 1, 3, 2])]
    assert [m.content for m in route_priority(messages)] == [1, 3, 4, 0, 2]


class TestAgentRegistry:
    async def test_register_and_dispatch(self):
        registry = AgentRegistry()
        await registry.register(HelloAgent("a1", [], MockTextGenerator()))
        reply = await registry.dispatch(
            Message(source_id="client", target_id="a1", message_type=MessageType.HELLO))
        assert reply.source_id == "a1"
        assert "a1" in registry
        assert registry.agent_ids() == ["a1"]

    async def test_duplicate(self):
        registry = AgentRegistry()
        await registry.register(HelloAgent("a1", [], MockTextGenerator()))
        with pytest.raises(RegistrationError):
            await registry.register(HelloAgent("a1", [], MockTextGenerator()))

    async def test_concurrent_duplicates(self):
        registry = AgentRegistry()
        results = await asyncio.gather(
            *(registry.register(HelloAgent("same", [], MockTextGenerator())) for _ in range(10)),
            return_exceptions=True,
        )
        assert sum(r is None for r in results) == 1
        assert all(isinstance(r, RegistrationError) for r in results if r is not None)
        assert len(registry) == 1

    async def test_unknown_target(self):
        registry = AgentRegistry()
        with pytest.raises(UnknownAgentError):
            await registry.dispatch(task("x", target="ghost"))

    async def test_messages_to_one_agent_are_serialized(self):
        class SlowAgent(HelloAgent):
            active = 0
            peak = 0

            async def process_message(self, message):
                SlowAgent.active += 1
                SlowAgent.peak = max(SlowAgent.peak, SlowAgent.active)
                await asyncio.sleep(0.01)
                SlowAgent.active -= 1
                return await super().process_message(message)

        registry = AgentRegistry()
        await registry.register(SlowAgent("slow", [], MockTextGenerator()))
        hello = Message(source_id="client", target_id="slow", message_type=MessageType.HELLO)
        replies = await asyncio.gather(*(registry.dispatch(hello) for _ in range(5)))
        assert len(replies) == 5
        assert SlowAgent.peak == 1
