"""
调度规则目录
约束谓词只引用这里的规则码
"""

from typing import Dict, Tuple

# 规则码 -> (说明, 是否为硬约束)
RULE_CATALOG: Dict[str, Tuple[str, bool]] = {
    "R1": ("监督任务（火鸡）时长足够且不晚于截止时间", True),
    "R2": ("监督任务进行期间每一分钟至少一人在家", True),
    "R3": ("其它烹饪任务（配菜）时长足够且不晚于截止时间", True),
    "R4": ("乘客被接送，接人时间不早于落地加取行李", True),
    "R5": ("租车在取行李之后且时长足够，租车完成前不能开车", True),
    "R6": ("位置连续，行驶时长不短于路程时间", True),
    "R7": ("截止时刻所有人在家，晚餐准时开始", True),
    "R8": ("不会开车的人不能驾驶", True),
    "R9": ("同一人的占用时段不重叠", True),
    "R10": ("乘客由其偏好的司机接送", False),
    "R11": ("指定的两人不同时做饭", False),
    "R12": ("任何动作不早于场景开始（或扰动获知）时间", True),
}

SOFT_RULES = frozenset(code for code, (_, hard) in RULE_CATALOG.items() if not hard)


def is_known_rule(code: str) -> bool:
    return code in RULE_CATALOG

