# geometric_path.py
"""
Этап 1: A* по 26-связной сетке вокселей и разрежение пути до точек маршрута,
соединённых свободными отрезками.
"""
import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from environment import VoxelGrid, raycast_free
from exceptions import InvalidEndpointError, NoGeometricPathError

logger = logging.getLogger(__name__)

# 26 соседей и длины шагов в вокселях
_OFFSETS = np.array([d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)], dtype=np.int64)
_STEP_LENGTHS = np.linalg.norm(_OFFSETS, axis=1)


@dataclass
class GeometricPath:
    """Центры вокселей o_1..o_H (H, 3) и длина пути, м."""
    points: np.ndarray
    cost: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class WaypointPath:
    """Точки маршрута w_1..w_N (N, 3); первая - старт, последняя - цель."""
    waypoints: np.ndarray

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.waypoints)

    def to_list(self) -> list:
        return self.waypoints.tolist()


def astar_grid(grid: VoxelGrid, start, goal) -> GeometricPath:
    """
    Кратчайший 26-связный путь между вокселями старта и цели.

    Стоимость шага - евклидово расстояние между центрами, эвристика - евклидово
    расстояние до цели. При равных f раньше раскрывается узел с большим g.

    Args:
        grid: сетка (обычно уже раздутая)
        start: точка старта, м
        goal: точка цели, м

    Returns:
        GeometricPath из центров вокселей

    Raises:
        InvalidEndpointError: старт или цель заняты / вне сетки
        NoGeometricPathError: пути нет
    """
    s = grid.world_to_index(start)
    g = grid.world_to_index(goal)
    if grid.is_occupied_index(s):
        raise InvalidEndpointError(f"Старт {np.asarray(start).tolist()} в занятом вокселе")
    if grid.is_occupied_index(g):
        raise InvalidEndpointError(f"Цель {np.asarray(goal).tolist()} в занятом вокселе")

    dims = np.array(grid.dims)
    occ = grid.occupancy
    res = grid.resolution
    start_id = int(np.ravel_multi_index(tuple(s), grid.dims))
    goal_id = int(np.ravel_multi_index(tuple(g), grid.dims))

    if start_id == goal_id:
        return GeometricPath(grid.index_to_world(s)[None, :], 0.0)

    def heuristic(idx: np.ndarray) -> float:
        return float(np.linalg.norm(idx - g)) * res

    g_cost: Dict[int, float] = {start_id: 0.0}
    parent: Dict[int, int] = {}
    closed = set()
    h0 = heuristic(s)
    open_heap = [(h0, -0.0, start_id)]
    expanded = 0

    while open_heap:
        _, neg_g, node = heapq.heappop(open_heap)
        if node in closed:
            continue
        cur_g = -neg_g
        if cur_g > g_cost[node]:
            continue
        closed.add(node)
        expanded += 1
        if node == goal_id:
            break

        idx = np.array(np.unravel_index(node, grid.dims))
        nbrs = idx[None, :] + _OFFSETS
        inside = np.all((nbrs >= 0) & (nbrs < dims), axis=1)
        for nb, step in zip(nbrs[inside], _STEP_LENGTHS[inside]):
            if occ[nb[0], nb[1], nb[2]]:
                continue
            nb_id = int(np.ravel_multi_index(tuple(nb), grid.dims))
            if nb_id in closed:
                continue
            new_g = cur_g + step * res
            if new_g < g_cost.get(nb_id, math.inf):
                g_cost[nb_id] = new_g
                parent[nb_id] = node
                heapq.heappush(open_heap, (new_g + heuristic(nb), -new_g, nb_id))
    else:
        raise NoGeometricPathError(
            f"Нет пути по сетке между {np.asarray(start).tolist()} и {np.asarray(goal).tolist()}"
        )

    chain = [goal_id]
    while chain[-1] != start_id:
        chain.append(parent[chain[-1]])
    chain.reverse()
    idx = np.array(np.unravel_index(np.array(chain), grid.dims)).T
    path = GeometricPath(grid.index_to_world(idx), g_cost[goal_id])
    logger.info(f"[ASTAR] Путь: {len(path)} вокселей, длина {path.cost:.2f} м, раскрыто {expanded}")
    return path


def sparsify(grid: VoxelGrid, path: GeometricPath) -> WaypointPath:
    """
    Жадное разрежение: от текущей опорной точки берётся самая дальняя точка пути,
    видимая по raycast_free; она становится следующей опорной. Концы сохраняются.
    """
    pts = path.points
    H = len(pts)
    if H <= 2:
        return WaypointPath(pts.copy())

    keep = [0]
    anchor = 0
    while anchor < H - 1:
        nxt = anchor + 1
        for j in range(H - 1, anchor + 1, -1):
            if raycast_free(grid, pts[anchor], pts[j]):
                nxt = j
                break
        keep.append(nxt)
        anchor = nxt

    W = WaypointPath(pts[keep])
    logger.info(f"[ASTAR] Разрежение: {H} -> {len(W)} точек маршрута")
    return W
