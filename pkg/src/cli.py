"""
命令行入口
子命令 plan / check / disrupt / tsp / serve
"""

import argparse
import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .agent_repository import AgentRepository, default_repository, load_catalog
from .config import load_config, resolve_bind, resolve_path
from .i18n import set_language, t
from .meta_planner import PlanResult, plan, problem_from_scenario
from .metaheuristics import ALGORITHMS, AcoParams, GaParams, SaParams, solve_tsp
from .scenario import Schedule, format_clock, load_schedule_csv, resolve_scenario
from .schedule_checker import ScheduleMetrics, ViolationReport, check_schedule, compute_metrics
from .temporal_runtime import DeviationThresholds, handle_disruption, load_events
from .tsp_solvers import CAMPUS5, CAMPUS10, as_matrix, load_matrix, nearest_neighbor
from .workflow import MetricSet, workflow_to_dict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2

BUILTIN_MATRICES = {"campus5": CAMPUS5, "campus10": CAMPUS10}


# ---------------------------------------------------------------------------
# 配置 -> 参数

def metric_set_from_config(config: Dict) -> MetricSet:
    weights = config.get("planner", {}).get("weights", {})
    return MetricSet(
        satisfaction=float(weights.get("satisfaction", 1.0)),
        slack=float(weights.get("slack", 0.5)),
        idle=float(weights.get("idle", 0.25)),
    )


def thresholds_from_config(config: Dict) -> DeviationThresholds:
    monitoring = config.get("monitoring", {})
    return DeviationThresholds(int(monitoring.get("buffer", 15)), int(monitoring.get("tau", 30)))


def aco_presets_from_config(config: Dict) -> Dict[str, AcoParams]:
    aco = config.get("tsp", {}).get("aco", {})
    shared = {key: aco[key] for key in ("rho", "alpha", "beta", "deposit_q", "tau0") if key in aco}
    presets = {}
    for name in ("small", "large"):
        preset = aco.get(name, {})
        presets[name] = AcoParams(
            ants=int(preset.get("ants", 100)),
            iterations=int(preset.get("iterations", 50)),
            stagnation_k=preset.get("stagnation_k"),
            **shared,
        )
    return presets


def ga_params_from_config(config: Dict) -> GaParams:
    ga = config.get("tsp", {}).get("ga", {})
    return GaParams(
        population=int(ga.get("population", 100)),
        generations=int(ga.get("generations", 200)),
        tournament_size=int(ga.get("tournament", 3)),
        mutation_rate=float(ga.get("mutation_rate", 0.2)),
    )


def sa_params_from_config(config: Dict) -> SaParams:
    sa = config.get("tsp", {}).get("sa", {})
    return SaParams(t0=sa.get("t0"), cooling=float(sa.get("cooling", 0.95)), t_min=float(sa.get("t_min", 0.1)))


def repository_from_config(config: Dict) -> AgentRepository:
    """配置了智能体目录且文件存在时从目录登记，否则使用内置通用智能体"""
    catalog = config.get("data", {}).get("agents")
    if catalog and resolve_path(catalog).exists():
        repo = AgentRepository()
        for spec in load_catalog(resolve_path(catalog)):
            repo.register(spec)
        return repo
    return default_repository()


# ---------------------------------------------------------------------------
# 输出

def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def schedule_table(schedule: Schedule) -> pd.DataFrame:
    df = pd.DataFrame(schedule.sorted().to_rows(), columns=["start", "end", "task", "assignees"])
    return df.rename(columns={c: t(f"col_{c}") for c in df.columns})


def violation_table(report: ViolationReport) -> pd.DataFrame:
    rows = [
        {"rule": v.rule, "window": f"{format_clock(v.window[0])}-{format_clock(v.window[1])}",
         "description": v.description}
        for v in report.violations + report.soft_violations
    ]
    df = pd.DataFrame(rows, columns=["rule", "window", "description"])
    return df.rename(columns={c: t(f"col_{c}") for c in df.columns})


def metrics_table(metrics: ScheduleMetrics) -> pd.DataFrame:
    return pd.DataFrame([
        {"metric": t("metric_satisfaction"), "value": round(metrics.satisfaction_pct, 1)},
        {"metric": t("metric_slack"), "value": metrics.total_slack},
        {"metric": t("metric_idle"), "value": metrics.total_idle},
        {"metric": t("metric_makespan"), "value": metrics.makespan},
        {"metric": t("metric_travel"), "value": metrics.travel},
    ])


def report_to_dict(report: Optional[ViolationReport]) -> Optional[Dict[str, Any]]:
    if report is None:
        return None
    return {
        "feasible": report.feasible,
        "violations": [str(v) for v in report.violations],
        "soft_violations": [str(v) for v in report.soft_violations],
    }


def metrics_to_dict(metrics: Optional[ScheduleMetrics]) -> Optional[Dict[str, Any]]:
    if metrics is None:
        return None
    return {
        "satisfaction_pct": round(metrics.satisfaction_pct, 4),
        "total_slack": metrics.total_slack,
        "idle": dict(sorted(metrics.idle.items())),
        "makespan": metrics.makespan,
        "travel": metrics.travel,
    }


def plan_to_dict(result: PlanResult) -> Dict[str, Any]:
    return {
        "scenario": result.scenario.name,
        "feasible": result.feasible,
        "mapping": result.mapping,
        "value": _finite(result.value),
        "iterations": result.iterations,
        "schedule": result.schedule.sorted().to_rows() if result.schedule is not None else None,
        "metrics": metrics_to_dict(result.metrics),
        "report": report_to_dict(result.report),
        "defects": list(result.defects),
        "workflow": workflow_to_dict(result.workflow),
    }


def write_json(data: Dict[str, Any], file_path: str) -> None:
    """确定性 JSON：键排序，不含时间戳"""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"结果已写入: {path}")


def _print_report(report: ViolationReport) -> None:
    print(t("hard_violations", n=len(report.violations)))
    print(t("soft_violations", n=len(report.soft_violations)))
    if report.violations or report.soft_violations:
        print(violation_table(report).to_string(index=False))
    else:
        print(t("schedule_ok"))


def _print_plan(result: PlanResult) -> None:
    workflow = result.workflow
    print(t("workflow_summary", nodes=len(workflow.nodes), edges=len(workflow.edges),
            constraints=len(workflow.constraints)))
    if not result.feasible:
        print(t("plan_infeasible"))
        for defect in result.defects:
            print(f"  - {defect}")
        if result.report is not None:
            _print_report(result.report)
        return
    print(t("plan_feasible", mapping=result.mapping))
    print(t("plan_iterations", n=result.iterations, value=f"{result.value:.4f}"))
    print(schedule_table(result.schedule).to_string(index=False))
    if result.metrics is not None:
        print("\n" + t("metrics_title"))
        print(metrics_table(result.metrics).to_string(index=False))


# ---------------------------------------------------------------------------
# 子命令

def _packs(args: argparse.Namespace, config: Dict) -> List[str]:
    if args.packs is not None:
        return [p.strip() for p in args.packs.split(",") if p.strip()]
    return list(config.get("planner", {}).get("packs", []))


def cmd_plan(args: argparse.Namespace, config: Dict) -> int:
    scenario = resolve_scenario(args.scenario)
    problem = problem_from_scenario(scenario, _packs(args, config), metric_set_from_config(config))
    result = plan(problem, repository_from_config(config), int(config["planner"].get("max_iters", 100)))

    print("=" * 50)
    print(t("plan_title", name=scenario.name))
    _print_plan(result)
    if args.out:
        write_json(plan_to_dict(result), args.out)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_check(args: argparse.Namespace, config: Dict) -> int:
    scenario = resolve_scenario(args.scenario)
    schedule = load_schedule_csv(args.schedule, scenario)
    report = check_schedule(scenario, schedule)
    metrics = compute_metrics(scenario, schedule, report)

    print("=" * 50)
    print(t("check_title", name=scenario.name))
    _print_report(report)
    print("\n" + t("metrics_title"))
    print(metrics_table(metrics).to_string(index=False))
    if args.out:
        write_json({"scenario": scenario.name, "report": report_to_dict(report),
                    "metrics": metrics_to_dict(metrics)}, args.out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_disrupt(args: argparse.Namespace, config: Dict) -> int:
    scenario = resolve_scenario(args.scenario)
    events = load_events(args.events, scenario)
    if not events:
        raise ValueError(f"事件文件中没有事件: {args.events}")

    problem = problem_from_scenario(scenario, _packs(args, config), metric_set_from_config(config))
    repo = repository_from_config(config)
    thresholds = thresholds_from_config(config)
    outcomes = []
    for event in events:
        outcome = handle_disruption(problem, event, repo, thresholds)
        outcomes.append(outcome)
        problem = replace(problem, scenario=outcome.plan.scenario)

        print("=" * 50)
        print(t("disrupt_title", actor=event.actor, kind=event.kind))
        if outcome.alert is not None:
            print(t("disrupt_alert", time=format_clock(event.detected_at), delay=outcome.alert.delay,
                    severity=outcome.alert.severity))
        if outcome.directive is not None:
            print(t("disrupt_affected", nodes=list(outcome.directive.affected_nodes),
                    impact=outcome.directive.impact))
        _print_plan(outcome.plan)
        if outcome.rationale_log:
            print("\n" + t("rationale"))
            for minute, text in outcome.rationale_log:
                print(f"  [{format_clock(minute)}] {text}")

    final = outcomes[-1]
    if args.out:
        write_json({
            "events": [
                {"actor": o.alert.event.actor, "kind": o.alert.event.kind, "delay": o.alert.delay,
                 "severity": o.alert.severity} if o.alert else None
                for o in outcomes
            ],
            "plan": plan_to_dict(final.plan),
            "rationale": [[format_clock(m), text] for m, text in final.rationale_log],
        }, args.out)
    return EXIT_OK if final.feasible else EXIT_INFEASIBLE


def load_matrix_arg(value: str):
    if value.startswith("builtin:"):
        key = value.split(":", 1)[1]
        if key not in BUILTIN_MATRICES:
            raise ValueError(f"未知的内置矩阵: {key}，可选: {', '.join(BUILTIN_MATRICES)}")
        return as_matrix(BUILTIN_MATRICES[key])
    return load_matrix(value)


def cmd_tsp(args: argparse.Namespace, config: Dict) -> int:
    matrix = load_matrix_arg(args.matrix)
    tour = solve_tsp(matrix, args.algo, args.seed, args.preset,
                     aco_presets=aco_presets_from_config(config),
                     ga_params=ga_params_from_config(config),
                     sa_params=sa_params_from_config(config))
    baseline = nearest_neighbor(matrix)

    print("=" * 50)
    print(t("tsp_title", n=len(matrix), algo=args.algo or "auto"))
    print(t("tsp_result", tour=tour.labels(), length=tour.length))
    if args.out:
        write_json({"n": len(matrix), "algo": args.algo, "seed": args.seed, "length": tour.length,
                    "order": list(tour.order), "tour": tour.labels(),
                    "nearest_neighbor": baseline.length}, args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, config: Dict) -> int:
    from web.app import serve

    host, port = resolve_bind(config, args.bind)
    print(t("serve_start", host=host, port=port))
    serve(host, port, config.get("generator"))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="配置文件路径")
    common.add_argument("--lang", choices=["zh", "en"], help="输出语言")
    common.add_argument("--verbose", action="store_true", help="输出调试日志")
    common.add_argument("--out", help="把结果写入 JSON 文件")

    parser = argparse.ArgumentParser(prog="maci", description="MACI 规划引擎命令行")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="为场景生成调度")
    p.add_argument("--scenario", required=True, help="场景文件或 builtin:<名称>")
    p.add_argument("--packs", help="逗号分隔的知识包，空串表示不增强")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("check", parents=[common], help="检查调度 CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--schedule", required=True, help="start,end,task,assignees 格式的 CSV")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("disrupt", parents=[common], help="处理扰动事件并重规划")
    p.add_argument("--scenario", required=True)
    p.add_argument("--events", required=True, help="扰动事件 JSON")
    p.add_argument("--packs")
    p.set_defaults(handler=cmd_disrupt)

    p = sub.add_parser("tsp", parents=[common], help="求解 TSP")
    p.add_argument("--matrix", required=True, help="矩阵文件或 builtin:campus5 / builtin:campus10")
    p.add_argument("--algo", choices=ALGORITHMS, help="缺省按规模自动选择")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=["small", "large"], default="large", help="ACO 参数预设")
    p.set_defaults(handler=cmd_tsp)

    p = sub.add_parser("serve", parents=[common], help="启动注册/消息服务")
    p.add_argument("--bind", help="host:port，优先于环境变量 MACI_BIND")
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行主函数

    Returns:
        退出码：0 正常，1 不可行或存在硬违规，2 用法或输入错误
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        config = load_config(args.config)
    except ValueError as e:
        print(t("error", message=e))
        return EXIT_USAGE

    level = "DEBUG" if args.verbose else config.get("logging", {}).get("level", "INFO")
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        set_language(args.lang or config.get("cli", {}).get("language", "zh"))
        return args.handler(args, config)
    except (FileNotFoundError, ValueError) as e:
        logger.error(f"命令执行失败: {e}")
        print(t("error", message=e))
        return EXIT_USAGE
