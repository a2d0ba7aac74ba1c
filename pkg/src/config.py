"""
配置模块
读取 config/config.yaml 并与默认配置合并
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "config.yaml"
BIND_ENV = "MACI_BIND"

DEFAULT_CONFIG: Dict[str, Any] = {
    "planner": {
        "weights": {"satisfaction": 1.0, "slack": 0.5, "idle": 0.25},
        "max_iters": 100,
        "packs": ["airport", "household"],
    },
    "monitoring": {
        "buffer": 15,
        "tau": 30,
    },
    "tsp": {
        "aco": {
            "small": {"ants": 50, "iterations": 20, "stagnation_k": 5},
            "large": {"ants": 100, "iterations": 50, "stagnation_k": None},
            "rho": 0.1,
            "alpha": 1.0,
            "beta": 2.0,
            "deposit_q": 10.0,
            "tau0": 0.1,
        },
        "ga": {"population": 100, "generations": 200, "tournament": 3, "mutation_rate": 0.2},
        "sa": {"t0": None, "cooling": 0.95, "t_min": 0.1},
    },
    "service": {"host": "127.0.0.1", "port": 8000},
    "generator": {"type": "mock"},
    "cli": {"language": "zh"},
    "logging": {"level": "INFO"},
    "data": {
        "agents": "data/agents/common_agents.json",
        "scenario": "data/scenarios/thanksgiving.json",
    },
}


def _deep_merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(file_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    加载配置

    Args:
        file_path: 配置文件路径，缺省为 config/config.yaml

    Returns:
        与默认配置合并后的字典；文件缺失时返回默认配置

    Raises:
        ValueError: YAML 格式错误或顶层不是映射
    """
    path = Path(file_path) if file_path else DEFAULT_CONFIG_PATH
    if not path.exists():
        logger.warning(f"配置文件不存在: {path}，使用默认配置")
        return copy.deepcopy(DEFAULT_CONFIG)

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"配置文件格式错误: {path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"配置文件顶层必须是映射: {path}")

    logger.debug(f"配置加载成功: {path}")
    return _deep_merge(DEFAULT_CONFIG, data)


def parse_bind(value: str) -> Tuple[str, int]:
    """"host:port" -> (host, port)"""
    host, sep, port = value.rpartition(":")
    if not sep or not host:
        raise ValueError(f"绑定地址格式应为 host:port，实际为 {value!r}")
    try:
        return host, int(port)
    except ValueError as e:
        raise ValueError(f"端口必须是整数: {port!r}") from e


def resolve_bind(config: Dict[str, Any], bind: Optional[str] = None) -> Tuple[str, int]:
    """--bind 优先，其次环境变量 MACI_BIND，最后是配置中的 service 段"""
    if bind:
        return parse_bind(bind)
    env = os.environ.get(BIND_ENV)
    if env:
        return parse_bind(env)
    service = config.get("service", {})
    return service.get("host", "127.0.0.1"), int(service.get("port", 8000))


def resolve_path(value: Union[str, Path]) -> Path:
    """相对路径按项目根目录解析"""
    path = Path(value)
    return path if path.is_absolute() else PROJECT_ROOT / path
