"""
文本生成器模块
服务端智能体通过该接口调用语言模型；仓库内只提供确定性的 mock 实现
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional

logger = logging.getLogger(__name__)

MOCK_RESPONSE = "mock response"


class TextGenerator(ABC):
    """文本生成器接口"""

    @abstractmethod
    async def generate(self, prompt: str) -> str:
        """
        生成文本

        Args:
            prompt: 输入提示词

        Returns:
            生成的文本
        """

    def is_available(self) -> bool:
        return True

    def get_model_info(self) -> Dict[str, object]:
        return {"type": type(self).__name__, "model": "N/A", "available": self.is_available()}


class MockTextGenerator(TextGenerator):
    """固定返回 "mock response"，用于测试与离线运行"""

    def __init__(self, response: str = MOCK_RESPONSE):
        self.response = response
        self.calls = 0

    async def generate(self, prompt: str) -> str:
        self.calls += 1
        logger.debug(f"模拟生成，第 {self.calls} 次调用，提示词长度 {len(prompt)}")
        return self.response

    def get_model_info(self) -> Dict[str, object]:
        return {"type": "Mock", "model": "mock", "available": True}


def create_text_generator(config: Optional[Dict] = None) -> TextGenerator:
    """
    按配置创建文本生成器

    Args:
        config: 配置中的 generator 段，如 {"type": "mock", "response": "..."}

    Raises:
        ValueError: 未知的生成器类型
    """
    config = config or {}
    generator_type = str(config.get("type", "mock")).lower()
    if generator_type != "mock":
        raise ValueError(f"不支持的文本生成器类型: {generator_type}")
    return MockTextGenerator(config.get("response", MOCK_RESPONSE))
