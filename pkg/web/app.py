"""
智能体注册/消息服务
FastAPI 应用：注册服务端智能体、向已注册智能体投递消息
"""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional

from fastapi import FastAPI, HTTPException

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.agent_repository import RegistrationError
from src.messaging import (
    AgentRegistry, Message, RegistrationRequest, UnknownAgentError, create_agent,
)
from src.text_generator import TextGenerator, create_text_generator

logger = logging.getLogger(__name__)


def create_app(registry: Optional[AgentRegistry] = None,
               generator: Optional[TextGenerator] = None) -> FastAPI:
    """
    创建服务应用

    Args:
        registry: 智能体注册表，缺省新建
        generator: 注册的智能体共用的文本生成器，缺省为 mock
    """
    app = FastAPI(title="MACI agent registry")
    app.state.registry = registry or AgentRegistry()
    app.state.generator = generator or create_text_generator()

    @app.post("/agent/register")
    async def register_agent(registration: RegistrationRequest) -> Dict[str, str]:
        agent = create_agent(registration, app.state.generator)
        try:
            await app.state.registry.register(agent)
        except RegistrationError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {"status": "success", "agent_id": registration.agent_id,
                "message": f"Agent {registration.agent_id} registered"}

    @app.post("/agent/message", response_model=Message)
    async def send_message(message: Message) -> Message:
        try:
            return await app.state.registry.dispatch(message)
        except UnknownAgentError as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.get("/agents")
    async def list_agents() -> Dict[str, list]:
        return {"agents": app.state.registry.agent_ids()}

    @app.get("/health")
    async def health() -> Dict[str, object]:
        return {"status": "ok", "agents": len(app.state.registry),
                "generator": app.state.generator.get_model_info()}

    return app


def serve(host: str = "127.0.0.1", port: int = 8000, generator_config: Optional[Dict] = None) -> None:
    """用 uvicorn 启动服务（阻塞）"""
    import uvicorn

    logger.info(f"注册服务启动: {host}:{port}")
    uvicorn.run(create_app(generator=create_text_generator(generator_config)), host=host, port=port)


app = create_app()
