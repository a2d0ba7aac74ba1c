"""
国际化模块
命令行输出的中英文文本
"""

import logging
from typing import Dict

logger = logging.getLogger(__name__)

SUPPORTED_LANGUAGES = ("zh", "en")

# 翻译字典
TRANSLATIONS: Dict[str, Dict[str, str]] = {
    "zh": {
        # 规划
        "plan_title": "规划结果: {name}",
        "plan_feasible": "找到可行调度，映射: {mapping}",
        "plan_infeasible": "没有可行调度",
        "plan_iterations": "爬山迭代 {n} 次，V = {value}",
        "workflow_summary": "工作流: {nodes} 个节点，{edges} 条边，{constraints} 条约束",

        # 检查
        "check_title": "调度检查: {name}",
        "hard_violations": "{n} 条硬违规",
        "soft_violations": "{n} 条软违规",
        "schedule_ok": "调度满足全部硬约束",

        # 指标
        "metrics_title": "指标",
        "metric_satisfaction": "约束满足率 (%)",
        "metric_slack": "总 slack (分钟)",
        "metric_idle": "总空闲 (分钟)",
        "metric_makespan": "跨度 (分钟)",
        "metric_travel": "总行程 (分钟)",

        # 扰动
        "disrupt_title": "扰动处理: {actor} {kind}",
        "disrupt_alert": "{time} 获知延误 {delay} 分钟，严重度 {severity}",
        "disrupt_affected": "受影响节点: {nodes}，影响度 {impact}",
        "rationale": "决策记录",

        # TSP
        "tsp_title": "TSP 求解: n = {n}，算法 {algo}",
        "tsp_result": "最优环路 {tour}，长度 {length}",

        # 服务
        "serve_start": "注册服务启动于 http://{host}:{port}",

        # 表头
        "col_start": "开始",
        "col_end": "结束",
        "col_task": "任务",
        "col_assignees": "执行人",
        "col_rule": "规则",
        "col_window": "时间窗",
        "col_description": "说明",

        # 错误
        "error": "错误: {message}",
    },
    "en": {
        "plan_title": "Plan: {name}",
        "plan_feasible": "Feasible schedule found, mapping: {mapping}",
        "plan_infeasible": "No feasible schedule",
        "plan_iterations": "{n} hill-climbing iterations, V = {value}",
        "workflow_summary": "Workflow: {nodes} nodes, {edges} edges, {constraints} constraints",

        "check_title": "Schedule check: {name}",
        "hard_violations": "{n} hard violations",
        "soft_violations": "{n} soft violations",
        "schedule_ok": "Schedule satisfies every hard constraint",

        "metrics_title": "Metrics",
        "metric_satisfaction": "Satisfaction (%)",
        "metric_slack": "Total slack (min)",
        "metric_idle": "Total idle (min)",
        "metric_makespan": "Makespan (min)",
        "metric_travel": "Total travel (min)",

        "disrupt_title": "Disruption: {actor} {kind}",
        "disrupt_alert": "Delay of {delay} min known at {time}, severity {severity}",
        "disrupt_affected": "Affected nodes: {nodes}, impact {impact}",
        "rationale": "Rationale log",

        "tsp_title": "TSP: n = {n}, algorithm {algo}",
        "tsp_result": "Best tour {tour}, length {length}",

        "serve_start": "Registry service listening on http://{host}:{port}",

        "col_start": "start",
        "col_end": "end",
        "col_task": "task",
        "col_assignees": "assignees",
        "col_rule": "rule",
        "col_window": "window",
        "col_description": "description",

        "error": "Error: {message}",
    },
}

_global_language = "zh"


def get_text(key: str, lang: str = "zh", **kwargs) -> str:
    """
    获取翻译文本

    Args:
        key: 翻译键
        lang: 语言代码 ("zh" 或 "en")
        **kwargs: 格式化参数

    Returns:
        翻译后的文本；缺失的键原样返回
    """
    text = TRANSLATIONS.get(lang, TRANSLATIONS["zh"]).get(key, key)
    if kwargs:
        try:
            text = text.format(**kwargs)
        except (KeyError, ValueError) as e:
            logger.debug(f"翻译 {key} 格式化失败: {e}")
    return text


def get_language() -> str:
    return _global_language


def set_language(lang: str):
    """
    设置当前语言

    Raises:
        ValueError: 不支持的语言
    """
    global _global_language
    if lang not in SUPPORTED_LANGUAGES:
        raise ValueError(f"不支持的语言: {lang}，可选: {', '.join(SUPPORTED_LANGUAGES)}")
    _global_language = lang


def t(key: str, **kwargs) -> str:
    """翻译函数（快捷方式）"""
    return get_text(key, get_language(), **kwargs)
