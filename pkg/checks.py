# checks.py
"""
Отсев примитивов: ограничения тяги/наклона/скорости/угловой скорости по сэмплам
и адаптивная проверка столкновений с кэшем безопасных сфер.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Hashable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, model_validator

from constants import (
    GRAVITY, F_MIN, F_MAX, THETA_MAX_DEG, OMEGA_MAX, V_MAX,
    SINGULAR_THRUST, COLLISION_DT_MIN, LIMIT_RTOL,
    KIND_THRUST, KIND_TILT, KIND_VELOCITY, KIND_OMEGA, KIND_COLLISION, KIND_SINGULAR,
)
from environment import DistanceIndex, VoxelGrid
from exceptions import ParameterError
from primitives import PolynomialTrajectory
from utils.cache import SafeSphereCache

logger = logging.getLogger(__name__)

__all__ = [
    "ConstraintLimits", "Violation", "FlatOutputs", "SafeSphereCache",
    "flat_outputs", "check_constraints", "check_collision",
    "axis_accel_limits", "accel_peak",
]


class ConstraintLimits(BaseModel):
    """Пределы: тяга (нормированная на массу), наклон, скорость, угловая скорость."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    f_min: float = F_MIN
    f_max: float = F_MAX
    theta_max: float = THETA_MAX_DEG   # градусы
    v_max: float = V_MAX
    omega_max: float = OMEGA_MAX
    gravity: float = GRAVITY

    @model_validator(mode="after")
    def _check(self):
        if not 0.0 <= self.f_min <= self.f_max:
            raise ValueError(f"нужно 0 <= f_min <= f_max, получено {self.f_min}, {self.f_max}")
        if not 0.0 < self.theta_max < 90.0:
            raise ValueError(f"theta_max должен быть в (0, 90): {self.theta_max}")
        for name in ("f_max", "v_max", "omega_max", "gravity"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} должен быть > 0")
        return self


@dataclass(frozen=True)
class Violation:
    """Первое нарушение: время, вид, значение и предел."""
    time_s: float
    kind: str
    value: float
    limit: float

    def to_dict(self) -> dict:
        return asdict(self)


class FlatOutputs(NamedTuple):
    f: np.ndarray            # нормированная тяга, м/с²
    omega_norm: np.ndarray   # |ω|, рад/с
    singular: np.ndarray     # вырожденная тяга (свободное падение)


def flat_outputs(a, j, gravity: float = GRAVITY) -> FlatOutputs:
    """
    Тяга и модуль угловой скорости из производных позиции (нулевая скорость рысканья).

    f = a + g*z; z_B = f/|f|; |ω| = |j - (j·z_B) z_B| / |f|.
    Принимает векторы (3,) или массивы (K, 3).
    """
    a = np.asarray(a, dtype=float)
    j = np.asarray(j, dtype=float)
    f = a.copy()
    f[..., 2] += gravity
    fn = np.linalg.norm(f, axis=-1)
    singular = fn < SINGULAR_THRUST
    safe = np.where(singular, 1.0, fn)
    z_b = f / safe[..., None]
    j_perp = j - np.sum(j * z_b, axis=-1)[..., None] * z_b
    omega = np.where(singular, 0.0, np.linalg.norm(j_perp, axis=-1) / safe)
    return FlatOutputs(f, omega, singular)


def axis_accel_limits(limits: ConstraintLimits) -> np.ndarray:
    """
    Наибольшее достижимое ускорение по каждой оси внутри множества тяги.

    x, y: f_max*sin(theta_max); z: max(f_max - g вверх, g - f_min*cos(theta_max) вниз).
    """
    theta = math.radians(limits.theta_max)
    lateral = limits.f_max * math.sin(theta)
    vertical = max(limits.f_max - limits.gravity, limits.gravity - limits.f_min * math.cos(theta))
    return np.array([lateral, lateral, vertical])


def _real_roots_in(coef: np.ndarray, length: float) -> np.ndarray:
    coef = np.trim_zeros(np.asarray(coef, dtype=float), "b")
    if coef.size < 2:
        return np.array([])
    r = P.polyroots(coef)
    r = r[np.abs(r.imag) < 1e-9].real
    return r[(r >= 0.0) & (r <= length)]


def accel_peak(traj: PolynomialTrajectory) -> np.ndarray:
    """Точный максимум |a| по каждой оси (экстремумы - в нулях рывка или на концах куска)."""
    peak = np.zeros(traj.dims)
    for k, length in enumerate(traj.piece_lengths()):
        acc = traj.piece_coef(k, 2)
        jerk = traj.piece_coef(k, 3)
        for axis in range(traj.dims):
            times = np.concatenate([[0.0, length], _real_roots_in(jerk[:, axis], length)])
            peak[axis] = max(peak[axis], float(np.abs(P.polyval(times, acc[:, axis])).max()))
    return peak


def check_constraints(traj: PolynomialTrajectory, limits: ConstraintLimits, dt: float) -> Optional[Violation]:
    """
    Проверка ограничений в моментах 0, dt, 2dt, ..., T (T всегда включено).

    Returns:
        None если всё в порядке, иначе самое раннее нарушение
    """
    if not dt > 0.0:
        raise ParameterError(f"dt должен быть > 0: {dt}")
    T = traj.duration
    times = np.arange(0.0, T, dt) if T > 0.0 else np.array([0.0])
    if times[-1] < T:
        times = np.append(times, T)

    v = traj.sample(times, 1)
    a = traj.sample(times, 2)
    j = traj.sample(times, 3)
    out = flat_outputs(a, j, limits.gravity)
    fn = np.linalg.norm(out.f, axis=1)
    speed = np.linalg.norm(v, axis=1)
    cos_max = math.cos(math.radians(limits.theta_max))

    with np.errstate(invalid="ignore", divide="ignore"):
        tilt = np.degrees(np.arccos(np.clip(out.f[:, 2] / fn, -1.0, 1.0)))

    # пределы сравниваются с запасом LIMIT_RTOL: сэмпл с |v| = v_max после округления не нарушение
    lo, hi = 1.0 - LIMIT_RTOL, 1.0 + LIMIT_RTOL
    # порядок важен: при совпадении времени побеждает первый вид
    checks = [
        (KIND_SINGULAR, out.singular, fn, SINGULAR_THRUST),
        (KIND_THRUST, fn < limits.f_min * lo, fn, limits.f_min),
        (KIND_THRUST, fn > limits.f_max * hi, fn, limits.f_max),
        (KIND_TILT, fn * cos_max > out.f[:, 2] + LIMIT_RTOL * fn, tilt, limits.theta_max),
        (KIND_VELOCITY, speed > limits.v_max * hi, speed, limits.v_max),
        (KIND_OMEGA, out.omega_norm > limits.omega_max * hi, out.omega_norm, limits.omega_max),
    ]

    first = None
    for kind, mask, values, limit in checks:
        hits = np.flatnonzero(mask)
        if hits.size and (first is None or hits[0] < first[0]):
            first = (hits[0], kind, values, limit)
    if first is None:
        return None
    i, kind, values, limit = first
    return Violation(float(times[i]), kind, float(values[i]), float(limit))


def _bounds_exit_time(traj: PolynomialTrajectory, grid: VoxelGrid) -> Optional[float]:
    """Самый ранний момент выхода за границы сетки (точно, по экстремумам и пересечениям)."""
    lo, hi = grid.origin, grid.upper
    times = [0.0, traj.duration]
    for k, length in enumerate(traj.piece_lengths()):
        start = traj.breakpoints[k]
        pos = traj.piece_coef(k, 0)
        vel = traj.piece_coef(k, 1)
        for axis in range(traj.dims):
            times.extend(start + _real_roots_in(vel[:, axis], length))
            for bound in (lo[axis], hi[axis]):
                shifted = pos[:, axis].copy()
                shifted[0] -= bound
                times.extend(start + _real_roots_in(shifted, length))
    times = np.unique(np.clip(times, 0.0, traj.duration))
    pts = traj.sample(times, 0)
    outside = np.any((pts < lo) | (pts >= hi), axis=1)
    if not outside.any():
        return None
    return float(times[np.flatnonzero(outside)[0]])


def check_collision(traj: PolynomialTrajectory, index: DistanceIndex, cache: SafeSphereCache,
                    v_max: float, pair_key: Hashable,
                    dt_min: float = COLLISION_DT_MIN) -> Optional[Violation]:
    """
    Адаптивная проверка столкновений.

    В точке p(t): если p внутри сферы из кэша, следующий шаг (R - |p - c|) / v_max;
    иначе запрос d до ближайшего препятствия, d <= 0 - столкновение, иначе сфера (p, d)
    уходит в кэш и шаг d / v_max. Шаг не меньше dt_min; последняя проверка - в момент T.

    Returns:
        None или Violation вида collision
    """
    if not v_max > 0.0 or not dt_min > 0.0:
        raise ParameterError("v_max и dt_min должны быть > 0")

    t_out = _bounds_exit_time(traj, index.grid)
    if t_out is not None:
        logger.debug(f"[CHECK] Выход за границы сетки при t={t_out:.3f}")
        return Violation(t_out, KIND_COLLISION, 0.0, 0.0)

    T = traj.duration
    t = 0.0
    while True:
        p = traj.evaluate(t, 0)
        margin = cache.find(pair_key, p)
        if margin is None:
            d = index.query(p)
            if d <= 0.0:
                return Violation(float(t), KIND_COLLISION, float(d), 0.0)
            cache.add(pair_key, p, d)
            margin = d
        if t >= T:
            return None
        t = min(T, t + max(margin / v_max, dt_min))
