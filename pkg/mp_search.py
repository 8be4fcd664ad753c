# mp_search.py
"""
Этап 3: A* по LQMT-примитивам с эвристикой ρ·V_d* из графа скоростей.

Ускорение узла фиксируется жадно в момент, когда узел закрывается: оно берётся
из конечного ускорения лучшего входящего примитива. Поэтому граф поиска по размеру
совпадает с графом скоростей.
"""
import bisect
import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from checks import ConstraintLimits, Violation, accel_peak, check_collision, check_constraints, flat_outputs
from constants import CONTINUITY_TOL, LIMIT_RTOL, KIND_THRUST, KIND_TILT, KIND_VELOCITY, KIND_SINGULAR, SINGULAR_THRUST
from environment import DistanceIndex
from exceptions import DomainError, GraphDisconnectedError, InvalidStartError, StitchBoundaryError
from primitives import BoundaryState, PolynomialTrajectory, lqmt_optimal
from utils.cache import SafeSphereCache
from utils.timing import StageTimer, STAGE_MP, STAGE_CONSTRAINTS, STAGE_COLLISION
from velocity_graph import VelocityGraph

logger = logging.getLogger(__name__)

OPEN = "open"
SETTLED = "settled"

# запас на округление при сравнении пика ускорения с пределом
_ACCEL_PEAK_RTOL = 1e-9


# ============================================================================
# Склейка траекторий
# ============================================================================

class StitchedTrajectory:
    """
    Последовательность сегментов с накопленными сдвигами по времени.

    В момент стыка evaluate берёт правый сегмент (его t=0).
    """

    def __init__(self, segments: List[PolynomialTrajectory], total_cost: float = 0.0):
        if not segments:
            raise StitchBoundaryError("Нужен хотя бы один сегмент")
        self.segments = list(segments)
        durations = [s.duration for s in self.segments]
        self.offsets = np.concatenate([[0.0], np.cumsum(durations)[:-1]])
        self.total_duration = float(sum(durations))
        self.total_cost = float(total_cost)

    def __len__(self) -> int:
        return len(self.segments)

    def _locate(self, t: float):
        k = bisect.bisect_right(self.offsets.tolist(), t) - 1
        k = min(max(k, 0), len(self.segments) - 1)
        seg = self.segments[k]
        local = min(max(t - self.offsets[k], 0.0), seg.duration)
        return seg, local

    def evaluate(self, t: float, order: int = 0) -> np.ndarray:
        if not 0.0 <= t <= self.total_duration:
            raise DomainError(f"t={t} вне [0, {self.total_duration}]")
        seg, local = self._locate(t)
        return seg.evaluate(local, order)

    def sample(self, times, order: int = 0) -> np.ndarray:
        times = np.asarray(times, dtype=float).reshape(-1)
        return np.array([self.evaluate(float(t), order) for t in times]).reshape(-1, 3)

    def boundary_states(self) -> List[BoundaryState]:
        """Состояния в начале каждого сегмента и в конце последнего."""
        states = [seg.state_at(0.0) for seg in self.segments]
        states.append(self.segments[-1].state_at(self.segments[-1].duration))
        return states

    def seam_errors(self) -> np.ndarray:
        """
        Разрывы на стыках: массив (стыки, 3) - max |Δ| позиции, скорости, ускорения.
        """
        errors = []
        for left, right in zip(self.segments, self.segments[1:]):
            errors.append([
                float(np.abs(left.evaluate(left.duration, order) - right.evaluate(0.0, order)).max())
                for order in range(3)
            ])
        return np.array(errors).reshape(-1, 3)

    def to_dict(self) -> dict:
        return {
            "total_duration": self.total_duration,
            "total_cost": self.total_cost,
            "segments": [
                {
                    **seg.to_dict(),
                    "start_time": float(off),
                    "start_state": seg.state_at(0.0).to_dict(),
                    "end_state": seg.state_at(seg.duration).to_dict(),
                }
                for seg, off in zip(self.segments, self.offsets)
            ],
        }


def stitch(segments: List[PolynomialTrajectory], total_cost: float = 0.0,
           tol: float = CONTINUITY_TOL) -> StitchedTrajectory:
    """
    Склеивает сегменты; позиция, скорость и ускорение на стыках должны совпадать.

    Raises:
        StitchBoundaryError: разрыв больше tol
    """
    traj = StitchedTrajectory(segments, total_cost)
    errors = traj.seam_errors()
    if errors.size and errors.max() > tol:
        joint, order = np.unravel_index(int(np.argmax(errors)), errors.shape)
        raise StitchBoundaryError(
            f"Разрыв на стыке {joint}: производная порядка {order}, {errors.max():.3e} > {tol}"
        )
    return traj


# ============================================================================
# Поиск
# ============================================================================

@dataclass
class MPNode:
    node_id: int
    g: float = math.inf
    arrival_acceleration: Optional[np.ndarray] = None
    status: str = OPEN
    parent: Optional[int] = None
    incoming: Optional[PolynomialTrajectory] = None


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    edges_generated: int = 0
    edges_pruned_collision: int = 0
    edges_pruned_constraint: int = 0
    distance_queries: int = 0
    cache_hits: int = 0
    pruned_by_kind: Dict[str, int] = field(default_factory=dict)

    def prune(self, violation: Violation, collision: bool) -> None:
        if collision:
            self.edges_pruned_collision += 1
        else:
            self.edges_pruned_constraint += 1
        self.pruned_by_kind[violation.kind] = self.pruned_by_kind.get(violation.kind, 0) + 1


@dataclass
class SearchResult:
    trajectory: StitchedTrajectory
    cost: float
    node_path: List[int]
    stats: SearchStats


def _check_start(state: BoundaryState, limits: ConstraintLimits, u_max: np.ndarray) -> None:
    """Начальное состояние должно лежать внутри ограничений (рывок неизвестен)."""
    a = state.accel_or_zero()
    out = flat_outputs(a, np.zeros(3), limits.gravity)
    fn = float(np.linalg.norm(out.f))
    problems = []
    if fn < SINGULAR_THRUST:
        problems.append(KIND_SINGULAR)
    elif fn < limits.f_min * (1.0 - LIMIT_RTOL) or fn > limits.f_max * (1.0 + LIMIT_RTOL):
        problems.append(KIND_THRUST)
    elif out.f[2] < fn * math.cos(math.radians(limits.theta_max)) - LIMIT_RTOL * fn:
        problems.append(KIND_TILT)
    if float(np.linalg.norm(state.velocity)) > limits.v_max * (1.0 + LIMIT_RTOL):
        problems.append(KIND_VELOCITY)
    if np.any(np.abs(a) > u_max * (1.0 + _ACCEL_PEAK_RTOL)):
        problems.append(KIND_THRUST)
    if problems:
        raise InvalidStartError(f"Начальное состояние нарушает ограничения: {sorted(set(problems))}")


def astar_mp(G: VelocityGraph, index: DistanceIndex, cfg, heuristic: bool = True,
             cache: Optional[SafeSphereCache] = None,
             timer: Optional[StageTimer] = None) -> SearchResult:
    """
    A* по примитивам на графе скоростей.

    f(n) = g(n) + h(n); h = ρ·V_d* (edge_cost="lqmt") или V_d* (edge_cost="time"),
    h ≡ 0 при heuristic=False (Дейкстра). При равных f раньше узел с меньшим h,
    затем с меньшим id.

    Args:
        G: граф скоростей с посчитанными V_d*
        index: индекс расстояний по раздутой сетке
        cfg: PlannerConfig
        heuristic: использовать V_d*
        cache: кэш безопасных сфер (по умолчанию новый)
        timer: секундомер этапов

    Returns:
        SearchResult

    Raises:
        InvalidStartError: начальное состояние вне ограничений или в препятствии
        GraphDisconnectedError: открытое множество исчерпано до цели
    """
    if G.cost_to_go is None:
        raise RuntimeError("Сначала нужно вызвать backward_cost_to_go")
    cache = cache if cache is not None else SafeSphereCache()
    timer = timer if timer is not None else StageTimer()
    limits: ConstraintLimits = cfg.limits
    u_max = G.u_max
    time_mode = cfg.edge_cost == "time"
    scale = 1.0 if time_mode else cfg.rho
    stats = SearchStats()
    queries_before = index.queries
    hits_before = cache.hits
    t_start = time.perf_counter()
    check_time = 0.0

    start_state = G.start_state
    _check_start(start_state, limits, u_max)
    if index.grid.is_occupied(start_state.position):
        raise InvalidStartError(f"Старт {start_state.position.tolist()} в препятствии")

    def h(node_id: int) -> float:
        return scale * float(G.cost_to_go[node_id]) if heuristic else 0.0

    nodes: Dict[int, MPNode] = {G.start_id: MPNode(G.start_id, 0.0)}
    open_heap = [(h(G.start_id), h(G.start_id), G.start_id, 0.0)]

    while open_heap:
        _, _, n_id, g = heapq.heappop(open_heap)
        node = nodes[n_id]
        if node.status == SETTLED or g > node.g:
            continue

        # закрытие узла: ускорение фиксируется один раз
        node.status = SETTLED
        if node.incoming is None:
            node.arrival_acceleration = start_state.accel_or_zero()
        else:
            node.arrival_acceleration = node.incoming.evaluate(node.incoming.duration, 2)
        if n_id == G.goal_id:
            break

        stats.nodes_expanded += 1
        layer = G.nodes[n_id].waypoint_index
        x0 = BoundaryState(G.waypoints[layer], G.nodes[n_id].velocity, node.arrival_acceleration)
        pair_key = (layer, layer + 1)

        for succ in G.successors(n_id):
            succ = int(succ)
            stats.edges_generated += 1
            succ_node = nodes.get(succ)
            if succ_node is not None and succ_node.status == SETTLED:
                continue

            T, traj, J = lqmt_optimal(x0, G.state(succ), cfg.rho)
            cost = T if time_mode else J
            new_g = g + cost
            if succ_node is not None and new_g >= succ_node.g:
                continue

            t0 = time.perf_counter()
            violation = check_constraints(traj, limits, cfg.constraint_dt)
            if violation is None:
                peak = accel_peak(traj)
                over = peak > u_max * (1.0 + _ACCEL_PEAK_RTOL)
                if over.any():
                    axis = int(np.argmax(peak - u_max))
                    violation = Violation(0.0, KIND_THRUST, float(peak[axis]), float(u_max[axis]))
            t1 = time.perf_counter()
            timer.add(STAGE_CONSTRAINTS, t1 - t0)
            check_time += t1 - t0
            if violation is not None:
                stats.prune(violation, collision=False)
                logger.debug(f"[MPS] {n_id}->{succ}: отсев {violation.kind} при t={violation.time_s:.3f}")
                continue

            t0 = time.perf_counter()
            violation = check_collision(traj, index, cache, limits.v_max, pair_key, cfg.collision_dt_min)
            t1 = time.perf_counter()
            timer.add(STAGE_COLLISION, t1 - t0)
            check_time += t1 - t0
            if violation is not None:
                stats.prune(violation, collision=True)
                logger.debug(f"[MPS] {n_id}->{succ}: столкновение при t={violation.time_s:.3f}")
                continue

            if succ_node is None:
                succ_node = nodes[succ] = MPNode(succ)
            succ_node.g = new_g
            succ_node.parent = n_id
            succ_node.incoming = traj
            heapq.heappush(open_heap, (new_g + h(succ), h(succ), succ, new_g))

    timer.add(STAGE_MP, time.perf_counter() - t_start - check_time)
    stats.distance_queries = index.queries - queries_before
    stats.cache_hits = cache.hits - hits_before

    goal = nodes.get(G.goal_id)
    if goal is None or goal.status != SETTLED:
        raise GraphDisconnectedError(
            f"Граф примитивов разорван: раскрыто {stats.nodes_expanded}, "
            f"отсеяно {stats.edges_pruned_constraint} по ограничениям и {stats.edges_pruned_collision} по столкновениям"
        )

    path = [G.goal_id]
    segments = []
    while nodes[path[-1]].parent is not None:
        segments.append(nodes[path[-1]].incoming)
        path.append(nodes[path[-1]].parent)
    path.reverse()
    segments.reverse()

    trajectory = stitch(segments, goal.g)
    mode = "A*" if heuristic else "Дейкстра"
    logger.info(
        f"[MPS] {mode}: стоимость {goal.g:.3f}, длительность {trajectory.total_duration:.3f} с, "
        f"раскрыто {stats.nodes_expanded}, рёбер {stats.edges_generated}"
    )
    return SearchResult(trajectory, goal.g, path, stats)
