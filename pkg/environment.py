# environment.py
"""
Мир из вокселей: генерация шумом Перлина, файлы сетки, запросы занятости,
расстояние до ближайшего препятствия и проверка отрезка на свободность.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from constants import PERLIN_OCTAVES, PERLIN_PERSISTENCE, PERLIN_FEATURE_SIZE
from exceptions import ParameterError
from storage.grid_file import read_grid_file, write_grid_file
from utils.noise import make_permutation, fractal3

logger = logging.getLogger(__name__)


# ============================================================================
# Сетка занятости
# ============================================================================

@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """
    3D сетка занятости.

    Индекс вокселя точки p: floor((p - origin) / resolution); всё вне границ занято.
    """
    occupancy: np.ndarray
    resolution: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inflation_radius: float = 0.0

    def __post_init__(self):
        occ = np.array(self.occupancy, dtype=bool, copy=True)
        if occ.ndim != 3 or min(occ.shape) < 1:
            raise ParameterError(f"Сетка должна быть трёхмерной с размерами >= 1: {occ.shape}")
        if not (math.isfinite(self.resolution) and self.resolution > 0.0):
            raise ParameterError(f"resolution должно быть > 0: {self.resolution}")
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))

    def __eq__(self, other) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (self.dims == other.dims
                and self.resolution == other.resolution
                and np.array_equal(self.origin, other.origin)
                and np.array_equal(self.occupancy, other.occupancy))

    __hash__ = None

    @property
    def dims(self) -> tuple:
        return tuple(int(n) for n in self.occupancy.shape)

    @property
    def upper(self) -> np.ndarray:
        """Верхний угол сетки в мировых координатах."""
        return self.origin + np.array(self.dims) * self.resolution

    def occupied_fraction(self) -> float:
        return float(self.occupancy.mean())

    def world_to_index(self, p) -> np.ndarray:
        return np.floor((np.asarray(p, dtype=float) - self.origin) / self.resolution).astype(np.int64)

    def index_to_world(self, idx) -> np.ndarray:
        """Центр вокселя."""
        return self.origin + (np.asarray(idx, dtype=float) + 0.5) * self.resolution

    def index_in_bounds(self, idx) -> bool:
        idx = np.asarray(idx)
        return bool(np.all(idx >= 0) and np.all(idx < np.array(self.dims)))

    def contains(self, p) -> bool:
        return self.index_in_bounds(self.world_to_index(p))

    def is_occupied_index(self, idx) -> bool:
        if not self.index_in_bounds(idx):
            return True
        return bool(self.occupancy[tuple(int(i) for i in idx)])

    def is_occupied(self, p) -> bool:
        return self.is_occupied_index(self.world_to_index(p))

    def occupied_points(self, points: np.ndarray) -> np.ndarray:
        """Векторная проверка занятости для массива точек (K, 3)."""
        idx = self.world_to_index(np.asarray(points, dtype=float).reshape(-1, 3))
        inside = np.all((idx >= 0) & (idx < np.array(self.dims)), axis=1)
        out = np.ones(len(idx), dtype=bool)
        ii = idx[inside]
        out[inside] = self.occupancy[ii[:, 0], ii[:, 1], ii[:, 2]]
        return out

    def inflated(self, radius: float) -> "VoxelGrid":
        """
        Раздувание препятствий: занят каждый воксель, центр которого не дальше radius
        от центра исходно занятого вокселя.
        """
        if radius < 0.0:
            raise ParameterError(f"inflation_radius должен быть >= 0: {radius}")
        occ = self.occupancy
        if radius > 0.0 and occ.any() and not occ.all():
            dist = ndimage.distance_transform_edt(~occ, sampling=self.resolution)
            occ = dist <= radius + 1e-9 * self.resolution
        logger.info(f"[GRID] Раздувание {radius} м: занятость {self.occupied_fraction():.3f} -> {occ.mean():.3f}")
        return VoxelGrid(occ, self.resolution, self.origin, self.inflation_radius + radius)

    def with_clearance(self, radius: float) -> "VoxelGrid":
        """
        Сетка для геометрического маршрута: заняты воксели, центр которых не дальше radius
        от занятого вокселя или от границы сетки. Радиус безопасности не меняется.
        """
        if radius < 0.0:
            raise ParameterError(f"route_clearance должен быть >= 0: {radius}")
        if radius == 0.0:
            return self
        # рамка из занятых вокселей: граница сетки тоже препятствие
        padded = np.pad(self.occupancy, 1, constant_values=True)
        dist = ndimage.distance_transform_edt(~padded, sampling=self.resolution)
        occ = (dist <= radius + 1e-9 * self.resolution)[1:-1, 1:-1, 1:-1]
        logger.debug(f"[GRID] Запас маршрута {radius} м: занятость {self.occupied_fraction():.3f} -> {occ.mean():.3f}")
        return VoxelGrid(occ, self.resolution, self.origin, self.inflation_radius)


# ============================================================================
# Генерация и файлы
# ============================================================================

def generate_perlin(seed: int, dims: Sequence[int], resolution: float, threshold: float,
                    octaves: int = PERLIN_OCTAVES, persistence: float = PERLIN_PERSISTENCE,
                    feature_size: float = PERLIN_FEATURE_SIZE, origin=(0.0, 0.0, 0.0)) -> VoxelGrid:
    """
    Сетка из шума Перлина: воксель занят, если шум в его центре >= threshold.

    Args:
        seed: зерно (результат детерминирован)
        dims: (nx, ny, nz)
        resolution: м/воксель
        threshold: порог, шум лежит в [-1, 1]
        octaves: число октав (>= 1)
        persistence: множитель амплитуды между октавами
        feature_size: период первой октавы, м
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ParameterError(f"dims должны быть тремя числами >= 1: {dims}")
    if octaves < 1:
        raise ParameterError(f"octaves должно быть >= 1: {octaves}")
    if not resolution > 0.0 or not feature_size > 0.0:
        raise ParameterError("resolution и feature_size должны быть > 0")

    rng = np.random.default_rng(seed)
    perm = make_permutation(rng)
    offsets = rng.uniform(0.0, 256.0, size=(octaves, 3))

    origin = np.asarray(origin, dtype=float)
    xs = (origin[0] + (np.arange(dims[0]) + 0.5) * resolution) / feature_size
    ys = (origin[1] + (np.arange(dims[1]) + 0.5) * resolution) / feature_size
    occ = np.empty(dims, dtype=bool)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    # по слоям z, чтобы не держать в памяти весь объём временных массивов
    for k in range(dims[2]):
        z = (origin[2] + (k + 0.5) * resolution) / feature_size
        Z = np.full_like(X, z)
        occ[:, :, k] = fractal3(X, Y, Z, perm, octaves, persistence, offsets) >= threshold

    grid = VoxelGrid(occ, resolution, origin)
    logger.info(f"[GRID] Перлин seed={seed} dims={dims} порог={threshold}: занятость {grid.occupied_fraction():.3f}")
    return grid


def save_grid(grid: VoxelGrid, path: str) -> None:
    write_grid_file(path, grid.occupancy, grid.resolution, grid.origin)


def load_grid(path: str) -> VoxelGrid:
    occupancy, resolution, origin = read_grid_file(path)
    return VoxelGrid(occupancy, resolution, origin)


# ============================================================================
# Расстояние до препятствий
# ============================================================================

class DistanceIndex:
    """
    k-d дерево по центрам занятых вокселей.

    Достаточно хранить только поверхностные воксели (есть свободный 6-сосед):
    для точки в свободном вокселе ближайший центр всегда поверхностный.
    Точки внутри занятых вокселей и вне сетки получают 0.
    """

    def __init__(self, grid: VoxelGrid):
        self.grid = grid
        self.half_diagonal = 0.5 * math.sqrt(3.0) * grid.resolution
        occ = grid.occupancy
        interior = ndimage.binary_erosion(occ, structure=ndimage.generate_binary_structure(3, 1),
                                          border_value=1)
        surface = np.argwhere(occ & ~interior)
        self.points = grid.index_to_world(surface) if len(surface) else np.zeros((0, 3))
        self.tree: Optional[cKDTree] = cKDTree(self.points) if len(self.points) else None
        self.queries = 0
        logger.info(f"[GRID] Индекс расстояний: {len(self.points)} поверхностных вокселей")

    @property
    def empty(self) -> bool:
        return self.tree is None

    def query(self, p) -> float:
        self.queries += 1
        if self.grid.is_occupied(p):
            return 0.0
        if self.tree is None:
            return math.inf
        d, _ = self.tree.query(np.asarray(p, dtype=float))
        return max(0.0, float(d) - self.half_diagonal)


def nearest_obstacle_distance(index: DistanceIndex, p) -> float:
    """Консервативное свободное расстояние от p до поверхности ближайшего занятого вокселя."""
    return index.query(p)


# ============================================================================
# Проверка отрезка
# ============================================================================

def raycast_free(grid: VoxelGrid, a, b) -> bool:
    """
    True, если все воксели, которые пересекает отрезок a->b, свободны.

    Отрезок разбивается по плоскостям граней вокселей; занятость проверяется
    в середине каждого интервала, так что учитываются только воксели с ненулевой
    длиной пересечения.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if grid.is_occupied(a) or grid.is_occupied(b):
        return False

    ga = (a - grid.origin) / grid.resolution
    gb = (b - grid.origin) / grid.resolution
    d = gb - ga
    ts = [np.array([0.0, 1.0])]
    for axis in range(3):
        if d[axis] == 0.0:
            continue
        lo, hi = sorted((ga[axis], gb[axis]))
        planes = np.arange(math.floor(lo) + 1, math.ceil(hi))
        if planes.size:
            ts.append((planes - ga[axis]) / d[axis])
    t = np.unique(np.clip(np.concatenate(ts), 0.0, 1.0))
    mids = 0.5 * (t[:-1] + t[1:])
    if mids.size == 0:
        return True
    pts = ga[None, :] + mids[:, None] * d[None, :]
    idx = np.floor(pts).astype(np.int64)
    dims = np.array(grid.dims)
    if np.any(idx < 0) or np.any(idx >= dims):
        return False
    return not bool(grid.occupancy[idx[:, 0], idx[:, 1], idx[:, 2]].any())
