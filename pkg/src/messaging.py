"""
消息协议与服务端智能体
pydantic 消息模型、HelloAgent / EngineBridgeAgent、线性化的智能体注册表
"""

import asyncio
import json
import logging
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

from pydantic import BaseModel, Field

from .agent_repository import RegistrationError
from .meta_planner import plan, problem_from_scenario
from .metaheuristics import solve_tsp
from .scenario import resolve_scenario, schedule_from_rows
from .schedule_checker import check_schedule
from .text_generator import MockTextGenerator, TextGenerator

logger = logging.getLogger(__name__)

ENGINE_CAPABILITY = "engine"
ENGINE_OPS = ("tsp", "check", "plan", "generate")


class MessageType(str, Enum):
    HELLO = "hello"
    TASK = "task"
    RESPONSE = "response"
    ERROR = "error"


class Message(BaseModel):
    source_id: str
    target_id: str
    message_type: MessageType
    content: Any = None
    priority: int = 1


class RegistrationRequest(BaseModel):
    agent_id: str = Field(min_length=1)
    capabilities: List[str] = Field(default_factory=list)


class UnknownAgentError(ValueError):
    """消息目标未注册"""


class BaseAgent(ABC):
    """服务端智能体基类"""

    def __init__(self, agent_id: str, capabilities: List[str], generator: TextGenerator):
        self.agent_id = agent_id
        self.capabilities = list(capabilities)
        self.generator = generator

    @abstractmethod
    async def process_message(self, message: Message) -> Message:
        pass

    async def hello(self) -> Message:
        return Message(
            source_id=self.agent_id,
            target_id="*",
            message_type=MessageType.HELLO,
            content=f"Agent {self.agent_id} ready with capabilities: {self.capabilities}",
        )

    def reply(self, message: Message, message_type: MessageType, content: Any) -> Message:
        return Message(source_id=self.agent_id, target_id=message.source_id,
                       message_type=message_type, content=content, priority=message.priority)

    def greet(self, message: Message) -> Message:
        return self.reply(message, MessageType.RESPONSE, f"Hello {message.source_id}, I am {self.agent_id}")


class HelloAgent(BaseAgent):
    """只响应 hello 消息"""

    async def process_message(self, message: Message) -> Message:
        if message.message_type == MessageType.HELLO:
            return self.greet(message)
        return self.reply(message, MessageType.ERROR, "Unsupported message type")


def _task_payload(content: Any) -> Dict:
    if isinstance(content, str):
        try:
            content = json.loads(content)
        except json.JSONDecodeError as e:
            raise ValueError(f"task 内容不是合法 JSON: {e.msg}") from e
    if not isinstance(content, dict) or "op" not in content:
        raise ValueError("task 内容必须是包含 op 字段的对象")
    return content


class EngineBridgeAgent(BaseAgent):
    """
    把 task 消息转发给规划引擎

    content 形如 {"op": "tsp", "matrix": [[...]]}、
    {"op": "check", "scenario": "builtin:baseline", "schedule": [...]}、
    {"op": "plan", "scenario": "builtin:augmented"} 或 {"op": "generate", "prompt": "..."}。
    """

    async def process_message(self, message: Message) -> Message:
        if message.message_type == MessageType.HELLO:
            return self.greet(message)
        if message.message_type != MessageType.TASK:
            return self.reply(message, MessageType.ERROR, "Unsupported message type")
        try:
            payload = _task_payload(message.content)
            op = payload["op"]
            if op not in ENGINE_OPS:
                raise ValueError(f"未知的操作: {op}，可选: {', '.join(ENGINE_OPS)}")
            if op == "generate":
                result = {"text": await self.generator.generate(str(payload.get("prompt", "")))}
            else:
                result = await asyncio.to_thread(getattr(self, f"_op_{op}"), payload)
        except (KeyError, TypeError, ValueError, FileNotFoundError) as e:
            logger.warning(f"{self.agent_id} 处理任务失败: {e}")
            return self.reply(message, MessageType.ERROR, str(e))
        return self.reply(message, MessageType.RESPONSE, result)

    @staticmethod
    def _op_tsp(payload: Dict) -> Dict:
        seed = payload.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, (int, str)):
            raise ValueError(f"seed 必须是整数: {seed!r}")
        tour = solve_tsp(payload["matrix"], payload.get("algo"), int(seed), payload.get("preset", "large"))
        return {"length": tour.length, "order": list(tour.order), "tour": tour.labels()}

    @staticmethod
    def _op_check(payload: Dict) -> Dict:
        scenario = resolve_scenario(payload.get("scenario", "builtin:baseline"))
        schedule = schedule_from_rows(payload.get("schedule", []), scenario)
        report = check_schedule(scenario, schedule)
        return {
            "feasible": report.feasible,
            "violations": [str(v) for v in report.violations],
            "soft_violations": [str(v) for v in report.soft_violations],
        }

    @staticmethod
    def _op_plan(payload: Dict) -> Dict:
        scenario = resolve_scenario(payload.get("scenario", "builtin:baseline"))
        result = plan(problem_from_scenario(scenario, payload.get("packs")))
        return {
            "feasible": result.feasible,
            "mapping": result.mapping,
            "schedule": result.schedule.to_rows() if result.schedule is not None else None,
        }


def create_agent(request: RegistrationRequest, generator: Optional[TextGenerator] = None) -> BaseAgent:
    """能力含 engine 时创建 EngineBridgeAgent，否则创建 HelloAgent"""
    generator = generator or MockTextGenerator()
    if ENGINE_CAPABILITY in request.capabilities:
        return EngineBridgeAgent(request.agent_id, request.capabilities, generator)
    return HelloAgent(request.agent_id, request.capabilities, generator)


class AgentRegistry:
    """
    服务端智能体注册表

    注册在全局锁内完成，并发注册同一 id 时恰有一个成功；
    发给同一智能体的消息由该智能体的锁串行处理。
    """

    def __init__(self):
        self._agents: Dict[str, BaseAgent] = {}
        self._agent_locks: Dict[str, asyncio.Lock] = {}
        self._lock = asyncio.Lock()

    def __len__(self) -> int:
        return len(self._agents)

    def __contains__(self, agent_id: str) -> bool:
        return agent_id in self._agents

    def agent_ids(self) -> List[str]:
        return list(self._agents)

    async def register(self, agent: BaseAgent) -> None:
        """
        注册智能体

        Raises:
            RegistrationError: id 已被注册
        """
        async with self._lock:
            if agent.agent_id in self._agents:
                raise RegistrationError(f"Agent {agent.agent_id} already registered")
            self._agents[agent.agent_id] = agent
            self._agent_locks[agent.agent_id] = asyncio.Lock()
        logger.info(f"智能体已注册: {agent.agent_id}，能力 {agent.capabilities}")

    async def get_agent(self, agent_id: str) -> BaseAgent:
        if agent_id not in self._agents:
            raise UnknownAgentError(f"Agent {agent_id} not found")
        return self._agents[agent_id]

    async def dispatch(self, message: Message) -> Message:
        """
        把消息交给目标智能体处理

        Raises:
            UnknownAgentError: 目标未注册
        """
        agent = await self.get_agent(message.target_id)
        async with self._agent_locks[agent.agent_id]:
            return await agent.process_message(message)


def route_priority(messages: Iterable[Message]) -> List[Message]:
    """高优先级先处理，同优先级保持到达顺序"""
    return sorted(messages, key=lambda m: -m.priority)
