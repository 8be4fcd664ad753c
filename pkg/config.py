# config.py
"""
Конфигурация.

1. Окружение (.env): только уровень логов, каталог вывода и число процессов бенчмарка.
   На результат планирования эти параметры не влияют.
2. Конфигурация планировщика: один JSON-файл, проверяется моделями pydantic.
"""
import json
import logging
import os
from typing import List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from checks import ConstraintLimits
from constants import (
    RHO, CONSTRAINT_DT, COLLISION_DT_MIN, INFLATION_RADIUS, ROUTE_CLEARANCE_VOXELS,
    MAGNITUDE_FRACTIONS, CONE_HALF_ANGLE_DEG, BOUNDARY_DIRECTIONS,
    PERLIN_OCTAVES, PERLIN_PERSISTENCE, PERLIN_FEATURE_SIZE, PERLIN_THRESHOLD,
    BENCH_RETRY_CAP, BENCH_MIN_SEPARATION,
)
from exceptions import ConfigError
from primitives import BoundaryState
from velocity_graph import VelocitySampleConfig

logger = logging.getLogger(__name__)

# Загрузка переменных из .env
load_dotenv()

# ============================================================================
# Окружение
# ============================================================================
LOG_LEVEL = os.getenv("STITCH_LOG_LEVEL", "INFO").upper()
OUTPUT_DIR = os.getenv("STITCH_OUTPUT_DIR", "out")
BENCH_WORKERS = int(os.getenv("STITCH_BENCH_WORKERS", "1"))

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


# ============================================================================
# Модели конфигурации планировщика
# ============================================================================

class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class StateConfig(_Model):
    position: List[float] = Field(min_length=3, max_length=3)
    velocity: List[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    acceleration: Optional[List[float]] = Field(default=None, min_length=3, max_length=3)

    def to_state(self, with_acceleration: bool) -> BoundaryState:
        accel = self.acceleration if self.acceleration is not None else [0.0, 0.0, 0.0]
        return BoundaryState(self.position, self.velocity, accel if with_acceleration else None)


class PerlinConfig(_Model):
    seed: int = 0
    dims: List[int] = Field(default=[100, 100, 10], min_length=3, max_length=3)
    resolution: float = Field(default=0.5, gt=0.0)
    threshold: float = PERLIN_THRESHOLD
    octaves: int = Field(default=PERLIN_OCTAVES, ge=1)
    persistence: float = Field(default=PERLIN_PERSISTENCE, gt=0.0, le=1.0)
    feature_size: float = Field(default=PERLIN_FEATURE_SIZE, gt=0.0)

    @model_validator(mode="after")
    def _dims(self):
        if min(self.dims) < 1:
            raise ValueError(f"dims должны быть >= 1: {self.dims}")
        return self


class GridSource(_Model):
    path: Optional[str] = None
    perlin: Optional[PerlinConfig] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.path is None) == (self.perlin is None):
            raise ValueError("нужен ровно один источник сетки: path или perlin")
        return self


class BenchmarkConfig(_Model):
    waypoints: List[int] = Field(default=[4, 6, 8], min_length=1)
    retry_cap: int = Field(default=BENCH_RETRY_CAP, ge=1)
    min_separation: float = Field(default=BENCH_MIN_SEPARATION, ge=0.0)
    vary_map: bool = True

    @model_validator(mode="after")
    def _waypoints(self):
        if min(self.waypoints) < 2:
            raise ValueError("число точек маршрута должно быть >= 2")
        return self


class PlannerConfig(_Model):
    """Все пределы, штрафы и наборы сэмплов планировщика."""
    limits: ConstraintLimits = ConstraintLimits()
    rho: float = RHO
    velocity: Optional[VelocitySampleConfig] = None
    start: StateConfig
    goal: StateConfig
    constraint_dt: float = Field(default=CONSTRAINT_DT, gt=0.0)
    collision_dt_min: float = Field(default=COLLISION_DT_MIN, gt=0.0)
    inflation_radius: float = Field(default=INFLATION_RADIUS, ge=0.0)
    route_clearance_voxels: float = Field(default=ROUTE_CLEARANCE_VOXELS, ge=0.0)
    grid: GridSource = GridSource(perlin=PerlinConfig())
    seed: int = 0
    edge_cost: Literal["lqmt", "time"] = "lqmt"
    benchmark: BenchmarkConfig = BenchmarkConfig()

    @model_validator(mode="after")
    def _check(self):
        if not self.rho > 1.0:
            raise ValueError(f"rho должен быть > 1: {self.rho}")
        if self.velocity is None:
            self.velocity = VelocitySampleConfig(
                magnitudes=[f * self.limits.v_max for f in MAGNITUDE_FRACTIONS],
                cone_half_angle=CONE_HALF_ANGLE_DEG,
                boundary_direction_count=BOUNDARY_DIRECTIONS,
            )
        if max(self.velocity.magnitudes) > self.limits.v_max:
            raise ValueError("модули скоростей не должны превышать v_max")
        return self

    def start_state(self) -> BoundaryState:
        return self.start.to_state(with_acceleration=True)

    def goal_state(self) -> BoundaryState:
        return self.goal.to_state(with_acceleration=False)


def parse_planner_config(data: dict) -> PlannerConfig:
    """Проверка словаря конфигурации; ошибки pydantic превращаются в ConfigError."""
    try:
        return PlannerConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Конфигурация не прошла проверку:\n{e}") from e


def load_planner_config(path: str) -> PlannerConfig:
    """
    Загружает конфигурацию планировщика из JSON.

    Args:
        path: путь к файлу

    Returns:
        PlannerConfig

    Raises:
        ConfigError: файл не читается, не JSON или не проходит проверку
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Не удалось прочитать конфигурацию {path}: {e}") from e
    cfg = parse_planner_config(data)
    logger.info(f"[CFG] Конфигурация загружена из {path}: rho={cfg.rho}, edge_cost={cfg.edge_cost}")
    return cfg
