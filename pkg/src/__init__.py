"""
MACI 规划引擎
元规划器、时间约束运行时、TSP 求解器与智能体注册服务
"""

__version__ = "0.1.0"
