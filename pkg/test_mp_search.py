#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Тесты этапа 3: поиск по примитивам, склейка траектории, сквозной план.

Использование:
    python test_mp_search.py
"""
import io
import math
import sys

# Настройка кодировки для Windows
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

import numpy as np

from environment import VoxelGrid
from exceptions import DomainError, GraphDisconnectedError, InvalidStartError, StitchBoundaryError
from geometric_path import WaypointPath
from mp_search import astar_mp, stitch
from pipeline import build_environment, plan, run_trial, summarize, velocity_stage, verify
from primitives import BoundaryState, lqmt_fixed_T, lqmt_optimal
from scripts.mock_worlds import empty_box, make_config
from utils.cache import SafeSphereCache
from utils.timing import STAGES


# Цвета для терминала
class Colors:
    GREEN = '\033[92m'
    RED = '\033[91m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    RESET = '\033[0m'
    BOLD = '\033[1m'

def print_success(text):
    print(f"{Colors.GREEN}✓{Colors.RESET} {text}")

def print_error(text):
    print(f"{Colors.RED}✗{Colors.RESET} {text}")

def print_info(text):
    print(f"{Colors.BLUE}ℹ{Colors.RESET} {text}")

def print_header(text):
    print(f"\n{Colors.BOLD}{Colors.YELLOW}{'='*70}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.YELLOW}{text:^70}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.YELLOW}{'='*70}{Colors.RESET}\n")


# Зигзаг на постоянной высоте в пустом объёме 20×20×4 м
ZIGZAG = [[2.0, 2.0, 2.0], [5.0, 3.0, 2.0], [8.0, 2.0, 2.0], [11.0, 4.0, 2.0], [14.0, 3.0, 2.0]]


def free_space_search(rho: float = 100.0, magnitudes=(0.0, 1.0, 2.0, 3.0)):
    cfg = make_config(ZIGZAG[0], ZIGZAG[-1], rho=rho, magnitudes=list(magnitudes))
    env = build_environment(cfg, grid=empty_box((40, 40, 8), 0.5))
    W = WaypointPath(ZIGZAG)
    G = velocity_stage(W, cfg, BoundaryState.at_rest(ZIGZAG[0]), BoundaryState(ZIGZAG[-1]))
    return cfg, env, W, G


# ============================================================================
# СКЛЕЙКА
# ============================================================================

def test_stitch():
    """Непрерывность на стыках, правый сегмент в момент стыка, ошибки"""
    print_header("ТЕСТ 1: Склейка сегментов")
    x0 = BoundaryState.at_rest([0.0, 0.0, 0.0])
    seg1 = lqmt_fixed_T(x0, BoundaryState([1.0, 0.5, 0.0], [1.0, 0.0, 0.0]), 1.0)
    seg2 = lqmt_fixed_T(seg1.state_at(1.0), BoundaryState([2.0, 0.0, 0.0]), 1.5)
    traj = stitch([seg1, seg2], total_cost=3.0)
    assert len(traj) == 2 and abs(traj.total_duration - 2.5) < 1e-12
    assert traj.seam_errors().max() <= 1e-9
    assert np.allclose(traj.evaluate(1.0, 3), seg2.evaluate(0.0, 3))
    assert np.allclose(traj.evaluate(2.5), [2.0, 0.0, 0.0])
    assert traj.sample(np.linspace(0.0, 2.5, 11)).shape == (11, 3)
    assert len(traj.boundary_states()) == 3
    print_success("Позиция, скорость и ускорение непрерывны; в стыке берётся правый сегмент")

    data = traj.to_dict()
    assert data["total_cost"] == 3.0 and data["segments"][1]["start_time"] == 1.0

    try:
        traj.evaluate(2.6)
        assert False, "ожидалась DomainError"
    except DomainError:
        pass

    jump = lqmt_fixed_T(BoundaryState([1.0, 0.5, 0.0], [1.0, 0.0, 0.0]), BoundaryState([2.0, 0.0, 0.0]), 1.5)
    for bad in ([seg1, jump], []):
        try:
            stitch(bad)
            assert False, "ожидалась StitchBoundaryError"
        except StitchBoundaryError:
            pass
    print_success("Разрыв ускорения и пустой список отклоняются")


# ============================================================================
# ПОИСК
# ============================================================================

def test_single_primitive():
    """N=2 в свободном пространстве: один примитив со стоимостью J*"""
    print_header("ТЕСТ 2: Один примитив")
    start, goal = [1.25, 1.25, 1.25], [5.25, 4.25, 1.25]
    cfg = make_config(start, goal)
    env = build_environment(cfg, grid=empty_box((20, 20, 10), 0.5))
    result = plan(cfg, env)
    assert len(result.waypoints) == 2
    assert len(result.trajectory) == 1 and result.search.node_path == [0, 1]

    T_star, _, J_star = lqmt_optimal(BoundaryState.at_rest(start), BoundaryState(goal), cfg.rho)
    assert math.isclose(result.search.cost, J_star, rel_tol=1e-12)
    assert math.isclose(result.trajectory.total_duration, T_star, rel_tol=1e-12)

    tel = result.telemetry
    assert tel.nodes_expanded == 1 and tel.edges_generated == 1
    assert tel.graph_nodes == 2 and tel.graph_edges == 1 and tel.samples_per_waypoint == 0
    assert set(STAGES) <= set(tel.stage_times)
    assert verify(result, env, cfg).ok
    print_info(f"T* = {T_star:.3f} с, J* = {J_star:.2f}")
    print_success("Стоимость и длительность совпадают с LQMT")


def test_astar_matches_dijkstra():
    """A* с V_d* находит ту же стоимость, что и Дейкстра, и генерирует не больше рёбер"""
    print_header("ТЕСТ 3: A* против Дейкстры")
    for rho in (30.0, 300.0):
        cfg, env, W, G = free_space_search(rho)
        astar = astar_mp(G, env.index, cfg, heuristic=True, cache=SafeSphereCache())
        dijkstra = astar_mp(G, env.index, cfg, heuristic=False, cache=SafeSphereCache())
        assert math.isclose(astar.cost, dijkstra.cost, rel_tol=1e-9)
        assert astar.stats.edges_generated <= dijkstra.stats.edges_generated
        assert astar.stats.nodes_expanded <= dijkstra.stats.nodes_expanded
        print_info(f"rho={rho:g}: стоимость {astar.cost:.3f}, рёбер A* {astar.stats.edges_generated}, "
                   f"Дейкстра {dijkstra.stats.edges_generated} из {G.num_edges}")

        assert astar.node_path[0] == G.start_id and astar.node_path[-1] == G.goal_id
        layers = [G.nodes[n].waypoint_index for n in astar.node_path]
        assert layers == list(range(len(W)))
    print_success("Стоимости равны, A* не хуже по числу рёбер")


def test_trajectory_properties():
    """Прохождение через точки маршрута, непрерывность, соблюдение ограничений"""
    print_header("ТЕСТ 4: Свойства траектории")
    cfg, env, W, G = free_space_search()
    result = astar_mp(G, env.index, cfg)
    traj = result.trajectory
    assert len(traj) == len(W) - 1
    assert traj.seam_errors().max() <= 1e-9
    for k, seg in enumerate(traj.segments):
        assert np.allclose(seg.evaluate(0.0), W.waypoints[k], atol=1e-9)
        assert np.allclose(seg.evaluate(seg.duration), W.waypoints[k + 1], atol=1e-9)
        node = G.nodes[result.node_path[k + 1]]
        assert np.allclose(seg.evaluate(seg.duration, 1), node.velocity, atol=1e-9)
    assert np.allclose(traj.evaluate(0.0, 1), 0.0) and np.allclose(traj.evaluate(traj.total_duration, 1), 0.0)

    total = sum(cfg.rho * seg.duration + seg.control_cost() for seg in traj.segments)
    assert math.isclose(total, result.cost, rel_tol=1e-7)
    print_success(f"{len(traj)} сегментов, T = {traj.total_duration:.3f} с, стоимость сходится")


def test_time_edge_cost():
    """Режим edge_cost=time: стоимость пути - сумма длительностей"""
    print_header("ТЕСТ 5: Стоимость ребра - время")
    cfg, env, W, G = free_space_search()
    cfg = cfg.model_copy(update={"edge_cost": "time"})
    astar = astar_mp(G, env.index, cfg, heuristic=True)
    dijkstra = astar_mp(G, env.index, cfg, heuristic=False)
    assert math.isclose(astar.cost, astar.trajectory.total_duration, rel_tol=1e-9)
    assert math.isclose(astar.cost, dijkstra.cost, rel_tol=1e-9)
    print_success(f"Стоимость = длительность = {astar.cost:.3f} с")


def test_search_errors():
    """Разорванный граф и недопустимый старт"""
    print_header("ТЕСТ 6: Ошибки поиска")
    start, goal = [1.25, 1.25, 1.25], [5.25, 4.25, 1.25]
    tight = make_config(start, goal, limits={"f_min": 9.6, "f_max": 10.0, "v_max": 10.0})
    env = build_environment(tight, grid=empty_box((20, 20, 10), 0.5))
    try:
        plan(tight, env)
        assert False, "ожидалась GraphDisconnectedError"
    except GraphDisconnectedError:
        print_success("Все рёбра отсеяны по тяге -> GraphDisconnectedError")

    cfg, env, W, G = free_space_search()
    occ = np.zeros((40, 40, 8), dtype=bool)
    occ[4, 4, 4] = True
    blocked = build_environment(cfg, grid=VoxelGrid(occ, 0.5))
    try:
        astar_mp(G, blocked.index, cfg)
        assert False, "ожидалась InvalidStartError"
    except InvalidStartError:
        print_success("Старт в препятствии -> InvalidStartError")

    W2 = WaypointPath([ZIGZAG[0], ZIGZAG[1]])
    rocket = BoundaryState(ZIGZAG[0], np.zeros(3), [0.0, 0.0, 20.0])
    G2 = velocity_stage(W2, cfg, rocket, BoundaryState(ZIGZAG[1]))
    try:
        astar_mp(G2, env.index, cfg)
        assert False, "ожидалась InvalidStartError"
    except InvalidStartError:
        print_success("Начальное ускорение вне множества тяги -> InvalidStartError")


def test_perlin_batch():
    """Серия на карте Перлина: успехи есть, стоимости A* и Дейкстры равны, рёбер меньше"""
    print_header("ТЕСТ 7: Серия на карте Перлина")
    cfg = make_config(
        [0.25, 0.25, 0.25], [0.25, 0.25, 0.25],
        perlin={"seed": 3, "dims": [48, 48, 8], "resolution": 0.5, "threshold": 0.3},
        rho=100.0, magnitudes=[0.0, 1.0, 2.0, 3.0], seed=5,
        benchmark={"waypoints": [2, 3, 4], "retry_cap": 100, "min_separation": 3.0, "vary_map": False},
    )
    env = build_environment(cfg)
    results = [run_trial(cfg, trial, env) for trial in range(9)]
    summary = summarize(results)
    for r in results:
        row = r.row
        print_info(f"прогон {row['trial']}: N={row['waypoints']} {row['status']}, "
                   f"рёбер A* {row['astar_edges']} / Дейкстра {row['dijkstra_edges']}")

    assert summary["succeeded"] >= 3, f"успешно {summary['succeeded']} из 9: {summary['failures']}"
    assert "verification_failed" not in summary["failures"]
    assert summary["collisions"] == 0 and summary["constraint_violations"] == 0
    ok = [r.row for r in results if r.ok]
    assert all(row["costs_equal"] for row in ok)
    assert all(row["reduction_pct"] >= 0.0 for row in ok)
    multi = [row for row in ok if row["waypoints"] >= 3]
    assert multi, "нет успешных прогонов с промежуточными точками"
    assert np.mean([row["reduction_pct"] for row in multi]) > 0.0
    print_success(f"Успешно {summary['succeeded']}/9, среднее снижение рёбер {summary['mean_reduction_pct']:.1f}%")


# ============================================================================
# ЗАПУСК
# ============================================================================

def main():
    """Запуск всех тестов"""
    print(f"\n{Colors.BOLD}{Colors.BLUE}Тестирование поиска по примитивам{Colors.RESET}\n")

    tests = [
        ("Склейка сегментов", test_stitch),
        ("Один примитив", test_single_primitive),
        ("A* против Дейкстры", test_astar_matches_dijkstra),
        ("Свойства траектории", test_trajectory_properties),
        ("Стоимость ребра - время", test_time_edge_cost),
        ("Ошибки поиска", test_search_errors),
        ("Серия на карте Перлина", test_perlin_batch),
    ]

    results = []
    for test_name, test_func in tests:
        try:
            test_func()
            results.append((test_name, True))
        except Exception as e:
            print_error(f"Ошибка в тесте '{test_name}': {type(e).__name__}: {e}")
            results.append((test_name, False))

    print_header("РЕЗУЛЬТАТЫ ТЕСТИРОВАНИЯ")
    passed = sum(1 for _, result in results if result)
    for test_name, result in results:
        status = f"{Colors.GREEN}✓ PASSED{Colors.RESET}" if result else f"{Colors.RED}✗ FAILED{Colors.RESET}"
        print(f"  {status}  {test_name}")
    print(f"\n{Colors.BOLD}Итого: {passed}/{len(results)} тестов пройдено{Colors.RESET}\n")

    if passed != len(results):
        sys.exit(1)


if __name__ == "__main__":
    main()
