# primitives.py
"""
Аналитические примитивы движения.

- min_time_1d / min_time_3d: двойной интегратор минимального времени с |u| <= u_max
  (bang-bang, время переключения из квадратного уравнения);
- lqmt_fixed_T / lqmt_optimal: тройной интегратор, стоимость rho*T + ∫j² dt,
  конечное ускорение свободно;
- PolynomialTrajectory: кусочно-полиномиальное представление, к которому сводятся оба вида.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from constants import (
    LQMT_T_MIN,
    LQMT_T_CONDITIONING,
    ROOT_IMAG_TOL,
    NEWTON_POLISH_STEPS,
)
from exceptions import (
    ParameterError,
    ConditioningError,
    RootFindingError,
    DomainError,
)

logger = logging.getLogger(__name__)

# Порог "состояния совпадают" для вырожденного LQMT
_DEGENERATE_TOL = 1e-12


# ============================================================================
# Граничные состояния
# ============================================================================

def _vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ParameterError(f"{name}: ожидается 3-вектор, получено {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name}: нечисловые компоненты {arr}")
    return arr


@dataclass(frozen=True)
class BoundaryState:
    """Граничное состояние: позиция, скорость и (необязательно) ускорение.

    acceleration=None означает "свободно".
    """
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))
        if self.acceleration is not None:
            object.__setattr__(self, "acceleration", _vec3(self.acceleration, "acceleration"))

    @classmethod
    def at_rest(cls, position) -> "BoundaryState":
        return cls(position, np.zeros(3), np.zeros(3))

    def accel_or_zero(self) -> np.ndarray:
        return self.acceleration if self.acceleration is not None else np.zeros(3)

    def to_dict(self) -> dict:
        out = {"position": self.position.tolist(), "velocity": self.velocity.tolist()}
        if self.acceleration is not None:
            out["acceleration"] = self.acceleration.tolist()
        return out


# ============================================================================
# Кусочно-полиномиальная траектория
# ============================================================================

@dataclass
class PolynomialTrajectory:
    """
    Кусочно-полиномиальная траектория.

    breakpoints: возрастающие времена [0, t_1, ..., T]; кусок k действует на
        [breakpoints[k], breakpoints[k+1]].
    coefficients: массив (pieces, degree+1, dims), коэффициенты по возрастанию степени
        в локальном времени куска (t - breakpoints[k]).

    Траектория нулевой длительности хранится как breakpoints=[0.] и один постоянный кусок.
    Вычисление в точке излома берёт левый кусок.
    """
    breakpoints: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.ndim != 3:
            raise ParameterError("coefficients: ожидается массив (pieces, degree+1, dims)")
        pieces = self.coefficients.shape[0]
        if len(self.breakpoints) == 1:
            if pieces != 1 or self.breakpoints[0] != 0.0:
                raise ParameterError("Траектория нулевой длительности: нужен один кусок и breakpoints=[0]")
        else:
            if len(self.breakpoints) != pieces + 1:
                raise ParameterError("Число изломов не совпадает с числом кусков")
            if self.breakpoints[0] != 0.0 or np.any(np.diff(self.breakpoints) <= 0.0):
                raise ParameterError("breakpoints должны строго возрастать от 0")

    @classmethod
    def hold(cls, position, dims: int = 3) -> "PolynomialTrajectory":
        """Стоянка в точке, длительность 0."""
        coef = np.zeros((1, 1, dims))
        coef[0, 0, :] = np.asarray(position, dtype=float).reshape(-1)
        return cls(np.array([0.0]), coef)

    @property
    def duration(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def dims(self) -> int:
        return int(self.coefficients.shape[2])

    @property
    def pieces(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.duration == 0.0

    def piece_lengths(self) -> np.ndarray:
        if self.is_empty:
            return np.zeros(1)
        return np.diff(self.breakpoints)

    def piece_coef(self, k: int, order: int) -> np.ndarray:
        coef = self.coefficients[k]
        if order == 0:
            return coef
        if order >= coef.shape[0]:
            return np.zeros((1, coef.shape[1]))
        return P.polyder(coef, m=order, axis=0)

    def _piece_index(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, t, side="left") - 1
        return np.clip(idx, 0, self.pieces - 1)

    def evaluate(self, t: float, order: int = 0) -> np.ndarray:
        """
        Позиция/скорость/ускорение/рывок в момент t.

        Args:
            t: время в [0, T]
            order: 0..3

        Returns:
            np.ndarray формы (dims,)
        """
        if order < 0 or order > 3:
            raise ParameterError(f"order должен быть 0..3, получено {order}")
        T = self.duration
        if t < 0.0 or t > T or not np.isfinite(t):
            raise DomainError(f"t={t} вне [0, {T}]")
        k = int(self._piece_index(np.asarray(t)))
        tau = t - self.breakpoints[k]
        return P.polyval(tau, self.piece_coef(k, order))

    def sample(self, times: np.ndarray, order: int = 0) -> np.ndarray:
        """Векторное вычисление: возвращает массив (len(times), dims)."""
        times = np.asarray(times, dtype=float).reshape(-1)
        T = self.duration
        if times.size and (times.min() < 0.0 or times.max() > T):
            raise DomainError(f"Времена вне [0, {T}]")
        out = np.empty((times.size, self.dims))
        idx = self._piece_index(times)
        for k in np.unique(idx):
            mask = idx == k
            tau = times[mask] - self.breakpoints[k]
            out[mask] = P.polyval(tau, self.piece_coef(int(k), order)).T
        return out

    def state_at(self, t: float) -> BoundaryState:
        return BoundaryState(self.evaluate(t, 0), self.evaluate(t, 1), self.evaluate(t, 2))

    def control_cost(self) -> float:
        """∫ ||j||² dt по всем кускам и осям (аналитически)."""
        if self.is_empty:
            return 0.0
        total = 0.0
        for k, length in enumerate(self.piece_lengths()):
            jerk = self.piece_coef(k, 3)
            for axis in range(self.dims):
                sq = P.polymul(jerk[:, axis], jerk[:, axis])
                total += float(P.polyval(length, P.polyint(sq)))
        return total

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "breakpoints": self.breakpoints.tolist(),
            # [piece][axis][power]
            "coefficients": np.transpose(self.coefficients, (0, 2, 1)).tolist(),
        }


# ============================================================================
# Двойной интегратор минимального времени (bang-bang)
# ============================================================================

@dataclass(frozen=True)
class AxisBangBang:
    """Решение bang-bang по одной оси."""
    s0: float
    v0: float
    sf: float
    vf: float
    u_max: float
    switch_time: float
    final_time: float
    sign: int          # знак управления на первой дуге; 0 - вырожденный случай

    def to_trajectory(self) -> PolynomialTrajectory:
        """Одномерная кусочно-квадратичная траектория профиля."""
        if self.final_time == 0.0:
            return PolynomialTrajectory.hold([self.s0], dims=1)
        u1 = self.sign * self.u_max
        t1 = self.switch_time
        t2 = self.final_time - t1
        arcs = []
        s, v = self.s0, self.v0
        if t1 > 0.0:
            arcs.append((t1, [s, v, 0.5 * u1]))
            s, v = s + v * t1 + 0.5 * u1 * t1 * t1, v + u1 * t1
        if t2 > 0.0:
            arcs.append((t2, [s, v, -0.5 * u1]))
        breakpoints = np.concatenate([[0.0], np.cumsum([a[0] for a in arcs])])
        coef = np.array([a[1] for a in arcs]).reshape(len(arcs), 3, 1)
        return PolynomialTrajectory(breakpoints, coef)


@dataclass(frozen=True)
class BangBangSolution:
    axes: Tuple[AxisBangBang, ...]
    duration: float


def _min_time_arrays(s0, v0, sf, vf, u):
    """
    Векторное ядро: минимальное время, время переключения и знак первой дуги.

    Для порядка (+,-) скорость в момент переключения vs = +sqrt(u*dp + (v0²+vf²)/2),
    для (-,+) vs = -sqrt(-u*dp + (v0²+vf²)/2). Из двух допустимых берётся меньшее T.
    """
    s0, v0, sf, vf, u = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s0, v0, sf, vf, u)))
    dp = sf - s0
    half = 0.5 * (v0 * v0 + vf * vf)
    eps = 1e-12 * (1.0 + np.abs(v0) + np.abs(vf)) / u

    with np.errstate(invalid="ignore"):
        vs_p = np.sqrt(u * dp + half)
        t1_p = (vs_p - v0) / u
        t2_p = (vs_p - vf) / u
        ok_p = np.isfinite(vs_p) & (t1_p >= -eps) & (t2_p >= -eps)

        vs_m = -np.sqrt(-u * dp + half)
        t1_m = (v0 - vs_m) / u
        t2_m = (vf - vs_m) / u
        ok_m = np.isfinite(vs_m) & (t1_m >= -eps) & (t2_m >= -eps)

    t1_p, t2_p = np.maximum(t1_p, 0.0), np.maximum(t2_p, 0.0)
    t1_m, t2_m = np.maximum(t1_m, 0.0), np.maximum(t2_m, 0.0)
    T_p = np.where(ok_p, t1_p + t2_p, np.inf)
    T_m = np.where(ok_m, t1_m + t2_m, np.inf)

    use_p = T_p <= T_m
    T = np.where(use_p, T_p, T_m)
    t1 = np.where(use_p, t1_p, t1_m)
    sign = np.where(use_p, 1, -1)
    sign = np.where(T == 0.0, 0, sign)
    return T, t1, sign


def min_time_1d(s0: float, v0: float, sf: float, vf: float, u_max: float) -> Tuple[float, AxisBangBang]:
    """
    Минимальное время перевода (s0, v0) -> (sf, vf) при |u| <= u_max.

    Returns:
        (T, AxisBangBang)
    """
    if not u_max > 0.0:
        raise ParameterError(f"u_max должен быть > 0, получено {u_max}")
    T, t1, sign = _min_time_arrays(s0, v0, sf, vf, u_max)
    T = float(T)
    if not np.isfinite(T):
        raise RootFindingError(f"Нет допустимого bang-bang профиля для {(s0, v0, sf, vf, u_max)}")
    return T, AxisBangBang(float(s0), float(v0), float(sf), float(vf), float(u_max),
                           float(t1), T, int(sign))


def _axis_limits(u_max) -> np.ndarray:
    u = np.broadcast_to(np.asarray(u_max, dtype=float), (3,)).copy()
    if np.any(u <= 0.0):
        raise ParameterError(f"u_max должен быть > 0, получено {u_max}")
    return u


def min_time_solution(x0: BoundaryState, xf: BoundaryState, u_max) -> BangBangSolution:
    """Покоординатные решения bang-bang; общая длительность - максимум по осям."""
    u = _axis_limits(u_max)
    axes = tuple(
        min_time_1d(x0.position[i], x0.velocity[i], xf.position[i], xf.velocity[i], u[i])[1]
        for i in range(3)
    )
    return BangBangSolution(axes, max(a.final_time for a in axes))


def min_time_3d(x0: BoundaryState, xf: BoundaryState, u_max) -> float:
    """
    T_d = max по осям min_time_1d. Ускорения состояний игнорируются.

    u_max: скаляр или 3-вектор (предел по каждой оси).
    """
    u = _axis_limits(u_max)
    T, _, _ = _min_time_arrays(x0.position, x0.velocity, xf.position, xf.velocity, u)
    return float(np.max(T))


def min_time_table(p0: np.ndarray, V0: np.ndarray, pf: np.ndarray, Vf: np.ndarray, u_max) -> np.ndarray:
    """
    Таблица T_d для всех пар скоростей двух соседних точек.

    Args:
        p0, pf: позиции (3,)
        V0: скорости (M0, 3); Vf: скорости (M1, 3)

    Returns:
        np.ndarray (M0, M1)
    """
    u = _axis_limits(u_max)
    V0 = np.asarray(V0, dtype=float).reshape(-1, 3)[:, None, :]
    Vf = np.asarray(Vf, dtype=float).reshape(-1, 3)[None, :, :]
    T, _, _ = _min_time_arrays(np.asarray(p0)[None, None, :], V0,
                               np.asarray(pf)[None, None, :], Vf, u[None, None, :])
    return T.max(axis=2)


# ============================================================================
# LQMT: тройной интегратор со свободным конечным ускорением
# ============================================================================

def _boundary_deltas(x0: BoundaryState, xf: BoundaryState):
    return (xf.position - x0.position, xf.velocity - x0.velocity,
            x0.velocity, x0.accel_or_zero())


def lqmt_fixed_T(x0: BoundaryState, xf: BoundaryState, T: float) -> PolynomialTrajectory:
    """
    Оптимальный по ∫j² квинтик при фиксированном T.

    Рывок квадратичен и обращается в ноль при t=T (свободное конечное ускорение):
    j(t) = alpha*(T-t) + beta*(T-t)², где alpha, beta из условий на p(T), v(T).
    """
    if not T > 0.0:
        raise ParameterError(f"T должно быть > 0, получено {T}")
    if T < LQMT_T_CONDITIONING:
        raise ConditioningError(f"T={T} слишком мало для устойчивого решения")

    dp, dv, v0, a0 = _boundary_deltas(x0, xf)
    dpos = dp - v0 * T - 0.5 * a0 * T * T
    dvel = dv - a0 * T
    alpha = (48.0 * dvel * T - 120.0 * dpos) / T ** 4
    beta = (160.0 * dpos - 60.0 * dvel * T) / T ** 5

    c0 = alpha * T + beta * T * T      # j(0)
    c1 = -alpha - 2.0 * beta * T       # j'(0)
    c2 = beta                          # j''(0)/2

    coef = np.zeros((1, 6, 3))
    coef[0, 0] = x0.position
    coef[0, 1] = x0.velocity
    coef[0, 2] = 0.5 * a0
    coef[0, 3] = c0 / 6.0
    coef[0, 4] = c1 / 24.0
    coef[0, 5] = c2 / 60.0
    return PolynomialTrajectory(np.array([0.0, T]), coef)


def lqmt_effort_polynomial(x0: BoundaryState, xf: BoundaryState) -> Polynomial:
    """
    Q(T) такой, что Σ_осей ∫j² dt = Q(T) / T⁵ для оптимального квинтика.
    """
    dp, dv, v0, a0 = _boundary_deltas(x0, xf)
    T = Polynomial([0.0, 1.0])
    Q = Polynomial([0.0])
    for i in range(3):
        dpos = dp[i] - v0[i] * T - 0.5 * a0[i] * T ** 2
        dvel = dv[i] - a0[i] * T
        A = 48.0 * dvel * T - 120.0 * dpos
        B = 160.0 * dpos - 60.0 * dvel * T
        Q = Q + (10.0 * A * A + 15.0 * A * B + 6.0 * B * B) / 30.0
    return Q


def lqmt_cost(Q: Polynomial, rho: float, T: float) -> float:
    return rho * T + float(Q(T)) / T ** 5


def real_positive_roots(poly: Polynomial) -> np.ndarray:
    """
    Вещественные положительные корни через собственные числа сопровождающей матрицы,
    с уточнением Ньютоном (шаг принимается только если невязка уменьшается).
    """
    coef = np.trim_zeros(poly.coef, "b")
    if coef.size < 2:
        return np.array([])
    eig = np.linalg.eigvals(P.polycompanion(coef))
    real = eig[np.abs(eig.imag) < ROOT_IMAG_TOL * (1.0 + np.abs(eig.real))].real
    dpoly = poly.deriv()
    polished = []
    for r in real:
        for _ in range(NEWTON_POLISH_STEPS):
            d = dpoly(r)
            if d == 0.0:
                break
            cand = r - poly(r) / d
            if abs(poly(cand)) < abs(poly(r)):
                r = cand
            else:
                break
        if r > 0.0:
            polished.append(r)
    return np.array(sorted(polished))


def is_degenerate(x0: BoundaryState, xf: BoundaryState) -> bool:
    dp, dv, v0, a0 = _boundary_deltas(x0, xf)
    scale = _DEGENERATE_TOL
    return (np.all(np.abs(dp) <= scale) and np.all(np.abs(dv) <= scale)
            and np.all(np.abs(v0) <= scale) and np.all(np.abs(a0) <= scale))


def lqmt_optimal(x0: BoundaryState, xf: BoundaryState, rho: float) -> Tuple[float, PolynomialTrajectory, float]:
    """
    Оптимальное T* для J(T) = rho*T + Σ_осей ∫j² dt с общим T.

    dJ/dT = 0 сводится к rho*T⁶ + T*Q'(T) - 5*Q(T) = 0; корни ищутся через
    сопровождающую матрицу, среди положительных берётся глобальный минимум J.

    Returns:
        (T*, траектория, J*)
    """
    if not rho > 1.0:
        raise ParameterError(f"rho должен быть > 1, получено {rho}")

    if is_degenerate(x0, xf):
        return 0.0, PolynomialTrajectory.hold(x0.position), 0.0

    Q = lqmt_effort_polynomial(x0, xf)
    T = Polynomial([0.0, 1.0])
    stationarity = rho * T ** 6 + T * Q.deriv() - 5.0 * Q

    roots = real_positive_roots(stationarity)
    if roots.size == 0:
        raise RootFindingError("Нет положительного вещественного корня dJ/dT = 0")

    candidates = np.unique(np.maximum(roots, LQMT_T_MIN))
    costs = np.array([lqmt_cost(Q, rho, t) for t in candidates])
    best = int(np.argmin(costs))
    T_star = float(candidates[best])
    J_star = float(costs[best])

    traj = lqmt_fixed_T(x0, xf, T_star)
    logger.debug(f"[LQMT] T*={T_star:.4f} J*={J_star:.4f} корней={roots.size}")
    return T_star, traj, J_star
