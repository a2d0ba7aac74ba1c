"""
规划引擎使用示例
演示规划、调度检查、扰动重规划与 TSP 求解
"""

import logging

from src.meta_planner import plan, problem_from_scenario
from src.metaheuristics import solve_tsp
from src.scenario import builtin_thanksgiving, format_clock, load_schedule_csv
from src.schedule_checker import check_schedule, compute_metrics
from src.temporal_runtime import DisruptionEvent, handle_disruption
from src.tsp_solvers import CAMPUS10, held_karp, nearest_neighbor


def main():
    logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(levelname)s - %(message)s')
    scenario = builtin_thanksgiving()

    # 规划
    print("=" * 50)
    print("规划基线场景...")
    result = plan(problem_from_scenario(scenario))
    print(f"可行: {result.feasible}，映射: {result.mapping}")
    print(f"迭代 {result.iterations} 次，V = {result.value:.4f}")
    for entry in result.schedule.sorted():
        print(f"  {format_clock(entry.start)}-{format_clock(entry.end)} {entry.task:<22} {', '.join(entry.assignees)}")

    # 检查已有调度
    print("\n" + "=" * 50)
    print("检查调度 deepseek_case_study.csv:")
    schedule = load_schedule_csv("data/fixtures/deepseek_case_study.csv", scenario)
    report = check_schedule(scenario, schedule)
    if report.feasible:
        print("  满足全部硬约束")
    else:
        print(f"检测到 {len(report.violations)} 条硬违规:")
        for violation in report.violations:
            print(f"  - {violation}")

    augmented = builtin_thanksgiving(augmented=True)
    schedule = load_schedule_csv("data/fixtures/deepseek_sequential.csv", augmented)
    metrics = compute_metrics(augmented, schedule)
    print("\n补充依赖场景下的 deepseek_sequential.csv:")
    print(f"  slack: {metrics.total_slack} 分钟，空闲: {metrics.total_idle} 分钟，行程: {metrics.travel} 分钟")

    # 扰动
    print("\n" + "=" * 50)
    print("航班延误: James 16:00 落地，10:00 获知")
    event = DisruptionEvent(detected_at=600, kind="flight_delay", actor="James", old_time=780, new_time=960)
    outcome = handle_disruption(problem_from_scenario(augmented), event)
    for minute, text in outcome.rationale_log:
        print(f"  [{format_clock(minute)}] {text}")
    if outcome.metrics is not None:
        print(f"  重规划后 slack: {outcome.metrics.total_slack} 分钟")

    # TSP
    print("\n" + "=" * 50)
    print("十个地点的 TSP:")
    exact = held_karp(CAMPUS10)
    print(f"  Held-Karp: {exact.labels()}，长度 {exact.length}")
    print(f"  最近邻: 长度 {nearest_neighbor(CAMPUS10).length}")
    for algo in ("aco", "ga", "sa"):
        tour = solve_tsp(CAMPUS10, algo, seed=0, preset="small")
        print(f"  {algo}: 长度 {tour.length}，评估 {tour.evaluations} 次")


if __name__ == "__main__":
    main()
