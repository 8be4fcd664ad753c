# scripts/mock_worlds.py
"""
Небольшие миры и конфигурации для тестов и ручной проверки.

Использование:
    from scripts.mock_worlds import corridor, wall_with_gap, make_config
"""
import os
import sys
from typing import Optional, Sequence

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import PlannerConfig, parse_planner_config
from environment import VoxelGrid, generate_perlin


# ============================================================================
# Сетки
# ============================================================================

def empty_box(dims=(20, 20, 10), resolution: float = 0.5) -> VoxelGrid:
    """Пустой объём без препятствий."""
    return VoxelGrid(np.zeros(dims, dtype=bool), resolution)


def corridor(length: int = 10, resolution: float = 1.0) -> VoxelGrid:
    """Пустой коридор length×1×1."""
    return VoxelGrid(np.zeros((length, 1, 1), dtype=bool), resolution)


def wall_with_gap(size: int = 7, gap=(3, 3), resolution: float = 1.0) -> VoxelGrid:
    """
    Куб size³ со стеной x = size//2 во всю плоскость yz, кроме одного вокселя gap=(y, z).
    """
    occ = np.zeros((size, size, size), dtype=bool)
    wall = size // 2
    occ[wall, :, :] = True
    occ[wall, gap[0], gap[1]] = False
    return VoxelGrid(occ, resolution)


def l_corridor(arm: int = 6, resolution: float = 1.0) -> VoxelGrid:
    """
    Г-образный коридор толщиной в один воксель в плоскости z=0:
    вдоль x от (0,0) до (arm-1,0), затем вдоль y до (arm-1, arm-1).
    """
    occ = np.ones((arm, arm, 1), dtype=bool)
    occ[:, 0, 0] = False
    occ[arm - 1, :, 0] = False
    return VoxelGrid(occ, resolution)


def single_voxel(dims=(5, 5, 5), at=(2, 2, 2), resolution: float = 1.0) -> VoxelGrid:
    """Один занятый воксель в пустом объёме."""
    occ = np.zeros(dims, dtype=bool)
    occ[tuple(at)] = True
    return VoxelGrid(occ, resolution)


def walled_goal(size: int = 9, resolution: float = 1.0) -> VoxelGrid:
    """Цель в центре замкнутой коробки со стенами толщиной в один воксель."""
    occ = np.zeros((size, size, size), dtype=bool)
    c = size // 2
    occ[c - 2:c + 3, c - 2:c + 3, c - 2:c + 3] = True
    occ[c - 1:c + 2, c - 1:c + 2, c - 1:c + 2] = False
    return VoxelGrid(occ, resolution)


def small_perlin(seed: int = 0, dims=(40, 40, 8), resolution: float = 0.5, threshold: float = 0.25) -> VoxelGrid:
    return generate_perlin(seed, dims, resolution, threshold)


# ============================================================================
# Конфигурации
# ============================================================================

def make_config(start: Sequence[float], goal: Sequence[float], *,
                grid_path: Optional[str] = None, perlin: Optional[dict] = None,
                magnitudes: Optional[Sequence[float]] = None,
                boundary_direction_count: int = 2,
                inflation_radius: float = 0.0, rho: float = 1000.0,
                edge_cost: str = "lqmt", seed: int = 0,
                benchmark: Optional[dict] = None, **extra) -> PlannerConfig:
    """Конфигурация планировщика с разумными значениями для маленьких миров."""
    data = {
        "start": {"position": list(start)},
        "goal": {"position": list(goal)},
        "rho": rho,
        "inflation_radius": inflation_radius,
        "edge_cost": edge_cost,
        "seed": seed,
    }
    if grid_path is not None:
        data["grid"] = {"path": grid_path}
    else:
        data["grid"] = {"perlin": perlin or {"seed": 0, "dims": [40, 40, 8], "resolution": 0.5, "threshold": 0.25}}
    if magnitudes is not None:
        data["velocity"] = {"magnitudes": list(magnitudes), "boundary_direction_count": boundary_direction_count}
    if benchmark is not None:
        data["benchmark"] = benchmark
    data.update(extra)
    return parse_planner_config(data)


def config_dict(start: Sequence[float], goal: Sequence[float], grid_path: str, **extra) -> dict:
    """Словарь для записи в JSON-файл конфигурации (для тестов CLI)."""
    data = {
        "start": {"position": list(start)},
        "goal": {"position": list(goal)},
        "grid": {"path": grid_path},
        "inflation_radius": 0.0,
    }
    data.update(extra)
    return data


if __name__ == "__main__":
    for name, grid in [("empty_box", empty_box()), ("corridor", corridor()),
                       ("wall_with_gap", wall_with_gap()), ("l_corridor", l_corridor()),
                       ("single_voxel", single_voxel()), ("small_perlin", small_perlin())]:
        print(f"{name:>14}: dims={grid.dims} occupancy={grid.occupied_fraction():.3f}")
