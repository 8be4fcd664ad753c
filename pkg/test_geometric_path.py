#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Тесты этапа 1: A* по сетке и разрежение пути.

Использование:
    python test_geometric_path.py
"""
import heapq
import io
import itertools
import math
import sys

# Настройка кодировки для Windows
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

import numpy as np

from environment import raycast_free
from exceptions import InvalidEndpointError, NoGeometricPathError
from geometric_path import GeometricPath, astar_grid, sparsify
from scripts.mock_worlds import corridor, empty_box, l_corridor, small_perlin, wall_with_gap, walled_goal


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


def brute_dijkstra(grid, start, goal) -> float:
    """Дейкстра без эвристики по всем свободным вокселям (оракул)."""
    s = tuple(int(i) for i in grid.world_to_index(start))
    g = tuple(int(i) for i in grid.world_to_index(goal))
    dist = {s: 0.0}
    heap = [(0.0, s)]
    steps = [d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)]
    while heap:
        d, node = heapq.heappop(heap)
        if node == g:
            return d
        if d > dist[node]:
            continue
        for step in steps:
            nb = tuple(a + b for a, b in zip(node, step))
            if grid.is_occupied_index(nb):
                continue
            nd = d + math.sqrt(sum(x * x for x in step)) * grid.resolution
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return math.inf


def assert_valid_path(grid, path):
    pts = path.points
    assert not grid.occupied_points(pts).any(), "все точки пути свободны"
    steps = np.abs(np.diff(grid.world_to_index(pts), axis=0))
    assert np.all(steps.max(axis=1) == 1), "соседние точки - 26-соседи"


# ============================================================================
# ТЕСТЫ
# ============================================================================

def test_trivial_paths():
    """Старт = цель и прямой коридор"""
    print_header("ТЕСТ 1: Тривиальные пути")
    grid = corridor(10, 1.0)
    same = astar_grid(grid, [3.5, 0.5, 0.5], [3.5, 0.5, 0.5])
    assert len(same) == 1 and same.cost == 0.0
    print_success("Старт = цель -> одна точка, стоимость 0")

    path = astar_grid(grid, [0.5, 0.5, 0.5], [9.5, 0.5, 0.5])
    assert len(path) == 10
    assert abs(path.cost - 9.0) < 1e-12
    assert np.allclose(path.points[:, 1:], 0.5)
    assert_valid_path(grid, path)
    print_success("Коридор 10x1x1: 10 точек, стоимость 9")


def test_wall_gap():
    """Путь проходит через единственный проём; стоимость равна перебору"""
    print_header("ТЕСТ 2: Стена с проёмом")
    grid = wall_with_gap(7, gap=(3, 3))
    start, goal = [0.5, 0.5, 0.5], [6.5, 6.5, 6.5]
    path = astar_grid(grid, start, goal)
    assert_valid_path(grid, path)
    assert any(np.allclose(p, [3.5, 3.5, 3.5]) for p in path.points)
    oracle = brute_dijkstra(grid, start, goal)
    assert abs(path.cost - oracle) < 1e-9
    print_info(f"Стоимость {path.cost:.4f}, оракул {oracle:.4f}")
    print_success("Путь через проём, стоимость оптимальна")


def test_optimal_on_perlin():
    """A* совпадает с Дейкстрой на случайных мирах"""
    print_header("ТЕСТ 3: Оптимальность на шуме Перлина")
    world = small_perlin(seed=4, dims=(16, 16, 4), resolution=0.5, threshold=0.3)
    free = world.index_to_world(np.argwhere(~world.occupancy))
    rng = np.random.default_rng(3)
    compared = 0
    for _ in range(10):
        a, b = free[rng.choice(len(free), 2, replace=False)]
        oracle = brute_dijkstra(world, a, b)
        if math.isinf(oracle):
            continue
        path = astar_grid(world, a, b)
        assert_valid_path(world, path)
        assert abs(path.cost - oracle) < 1e-9
        compared += 1
    assert compared > 0
    print_success(f"Совпадение на {compared} парах")


def test_errors():
    """Старт в препятствии и изолированная цель"""
    print_header("ТЕСТ 4: Ошибки")
    grid = wall_with_gap(7)
    try:
        astar_grid(grid, [3.5, 0.5, 0.5], [6.5, 6.5, 6.5])
        assert False, "ожидалась InvalidEndpointError"
    except InvalidEndpointError:
        print_success("Старт в стене -> InvalidEndpointError")

    boxed = walled_goal(9)
    try:
        astar_grid(boxed, [0.5, 0.5, 0.5], [4.5, 4.5, 4.5])
        assert False, "ожидалась NoGeometricPathError"
    except NoGeometricPathError:
        print_success("Цель в закрытой коробке -> NoGeometricPathError")


def test_sparsify_straight_and_trivial():
    """Прямая в свободном пространстве -> 2 точки; путь из одной точки не меняется"""
    print_header("ТЕСТ 5: Разрежение, простые случаи")
    grid = empty_box((12, 12, 4), 1.0)
    path = astar_grid(grid, [0.5, 0.5, 0.5], [11.5, 11.5, 0.5])
    W = sparsify(grid, path)
    assert len(W) == 2
    assert np.allclose(W.waypoints[0], path.points[0]) and np.allclose(W.waypoints[-1], path.points[-1])

    single = GeometricPath(np.array([[1.5, 1.5, 1.5]]), 0.0)
    assert np.array_equal(sparsify(grid, single).waypoints, single.points)
    print_success("2 точки на прямой, 1 точка без изменений")


def test_sparsify_corner():
    """Г-образный коридор: угол обязателен, 3 точки маршрута"""
    print_header("ТЕСТ 6: Разрежение, поворот на 90°")
    grid = l_corridor(6, 1.0)
    pts = [[x + 0.5, 0.5, 0.5] for x in range(6)] + [[5.5, y + 0.5, 0.5] for y in range(1, 6)]
    path = GeometricPath(np.array(pts), 10.0)
    W = sparsify(grid, path)
    assert not raycast_free(grid, pts[0], pts[-1]), "двух точек недостаточно"
    assert len(W) == 3
    assert np.allclose(W.waypoints[1], [5.5, 0.5, 0.5])
    print_success("Старт -> угол -> цель")


def test_sparsify_invariants():
    """N <= H, свободные отрезки, идемпотентность"""
    print_header("ТЕСТ 7: Свойства разрежения")
    world = small_perlin(seed=6, dims=(30, 30, 6), resolution=0.5, threshold=0.2)
    free = world.index_to_world(np.argwhere(~world.occupancy))
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(8):
        a, b = free[rng.choice(len(free), 2, replace=False)]
        try:
            path = astar_grid(world, a, b)
        except NoGeometricPathError:
            continue
        W = sparsify(world, path)
        assert len(W) <= len(path)
        assert np.array_equal(W.waypoints[0], path.points[0])
        assert np.array_equal(W.waypoints[-1], path.points[-1])
        for p, q in zip(W.waypoints, W.waypoints[1:]):
            assert raycast_free(world, p, q)
        again = sparsify(world, GeometricPath(W.waypoints, path.cost))
        assert np.array_equal(again.waypoints, W.waypoints)
        checked += 1
    assert checked > 0
    print_success(f"Свойства выполнены на {checked} путях")


# ============================================================================
# ЗАПУСК
# ============================================================================

def main():
    """Запуск всех тестов"""
    print(f"\n{Colors.BOLD}{Colors.BLUE}Тестирование этапа 1 (геометрический путь){Colors.RESET}\n")

    tests = [
        ("Тривиальные пути", test_trivial_paths),
        ("Стена с проёмом", test_wall_gap),
        ("Оптимальность на шуме Перлина", test_optimal_on_perlin),
        ("Ошибки", test_errors),
        ("Разрежение, простые случаи", test_sparsify_straight_and_trivial),
        ("Разрежение, поворот", test_sparsify_corner),
        ("Свойства разрежения", test_sparsify_invariants),
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
