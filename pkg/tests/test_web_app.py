"""
注册服务接口测试
"""

import asyncio

import httpx
import pytest
from fastapi.testclient import TestClient

from src.text_generator import MockTextGenerator
from web.app import create_app


@pytest.fixture
def client():
    return TestClient(create_app(generator=MockTextGenerator("pong")))


def register(client, agent_id, capabilities=()):
    return client.post("/agent/register", json={"agent_id": agent_id, "capabilities": list(capabilities)})


def test_register(client):
    response = register(client, "a1", ["greet"])
    assert response.status_code == 200
    assert response.json() == {"status": "success", "agent_id": "a1", "message": "Agent a1 registered"}
    assert client.get("/agents").json() == {"agents": ["a1"]}


def test_duplicate_registration(client):
    register(client, "a1")
    response = register(client, "a1")
    assert response.status_code == 400
    assert "already registered" in response.json()["detail"]


def test_invalid_registration(client):
    assert client.post("/agent/register", json={"capabilities": []}).status_code == 422
    assert client.post("/agent/register", json={"agent_id": ""}).status_code == 422


def test_hello_roundtrip(client):
    register(client, "a1")
    response = client.post("/agent/message", json={
        "source_id": "client", "target_id": "a1", "message_type": "hello", "content": None,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["message_type"] == "response"
    assert body["content"] == "Hello client, I am a1"


def test_unknown_target(client):
    response = client.post("/agent/message", json={
        "source_id": "client", "target_id": "ghost", "message_type": "hello",
    })
    assert response.status_code == 404


def test_invalid_message_type(client):
    register(client, "a1")
    response = client.post("/agent/message", json={
        "source_id": "client", "target_id": "a1", "message_type": "shout",
    })
    assert response.status_code == 422


def test_engine_task(client):
    register(client, "engine", ["engine"])
    response = client.post("/agent/message", json={
        "source_id": "client", "target_id": "engine", "message_type": "task",
        "content": {"op": "generate", "prompt": "ping"},
    })
    assert response.json()["content"] == {"text": "pong"}


@pytest.mark.parametrize("content", [
    {"op": "tsp", "matrix": [["a", "b"], ["c", "d"]]},
    {"op": "tsp", "matrix": [[0, 1], [1, 0]], "seed": None},
])
def test_malformed_engine_task_returns_error_message(client, content):
    register(client, "engine", ["engine"])
    message = {"source_id": "client", "target_id": "engine", "message_type": "task", "content": content}
    response = client.post("/agent/message", json=message)
    assert response.status_code == 200
    assert response.json()["message_type"] == "error"

    message["content"] = {"op": "tsp", "matrix": [[0, 1], [1, 0]], "seed": 3}
    response = client.post("/agent/message", json=message)
    assert response.status_code == 200
    assert response.json()["content"]["length"] == 2


def test_health(client):
    register(client, "a1")
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["agents"] == 1
    assert body["generator"]["type"] == "Mock"


async def test_concurrent_registrations_through_async_client():
    app = create_app()
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as client:
        responses = await asyncio.gather(*(
            client.post("/agent/register", json={"agent_id": f"agent-{i}"}) for i in range(100)
        ))
        assert [r.status_code for r in responses] == [200] * 100
        duplicate = await client.post("/agent/register", json={"agent_id": "agent-0"})
        assert duplicate.status_code == 400
        agents = (await client.get("/agents")).json()["agents"]
        reply = await client.post("/agent/message", json={
            "source_id": "client", "target_id": "agent-42", "message_type": "hello",
        })
    assert len(agents) == 100
    assert sorted(agents) == sorted(f"agent-{i}" for i in range(100))
    assert reply.json()["content"] == "Hello client, I am agent-42"


async def test_concurrent_duplicate_registrations_through_async_client():
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as client:
        responses = await asyncio.gather(*(
            client.post("/agent/register", json={"agent_id": "same"}) for _ in range(20)
        ))
        agents = (await client.get("/agents")).json()["agents"]
    assert sorted(r.status_code for r in responses) == [200] + [400] * 19
    assert agents == ["same"]
