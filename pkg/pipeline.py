# pipeline.py
"""
Сквозной прогон планировщика: окружение -> этап 1 -> этап 2 -> этап 3.
Используется командами plan и benchmark.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from checks import ConstraintLimits, axis_accel_limits, check_constraints, flat_outputs
from config import PlannerConfig
from constants import DENSE_CHECK_DT
from environment import DistanceIndex, VoxelGrid, generate_perlin, load_grid
from exceptions import NoGeometricPathError, StitchError
from geometric_path import GeometricPath, WaypointPath, astar_grid, sparsify
from mp_search import SearchResult, StitchedTrajectory, astar_mp
from primitives import BoundaryState
from utils.cache import SafeSphereCache
from utils.timing import StageTimer, Telemetry, STAGE_GEOMETRIC, STAGE_VELOCITY
from velocity_graph import VelocityGraph, backward_cost_to_go, build_velocity_graph, sample_velocities

logger = logging.getLogger(__name__)

# допуск прохождения через точки маршрута
WAYPOINT_TOL = 1e-6
# относительный допуск равенства стоимостей A* и Дейкстры
COST_RTOL = 1e-9


# ============================================================================
# Окружение
# ============================================================================

@dataclass
class Environment:
    grid: VoxelGrid          # исходная сетка
    inflated: VoxelGrid      # сетка с раздутыми препятствиями (для планирования)
    index: DistanceIndex     # индекс расстояний по раздутой сетке
    route: VoxelGrid         # раздутая сетка с запасом для этапа 1


def load_source_grid(cfg: PlannerConfig, seed_offset: int = 0) -> VoxelGrid:
    """Сетка из файла или из шума Перлина (seed_offset сдвигает зерно шума)."""
    if cfg.grid.path is not None:
        return load_grid(cfg.grid.path)
    p = cfg.grid.perlin
    return generate_perlin(p.seed + seed_offset, p.dims, p.resolution, p.threshold,
                           octaves=p.octaves, persistence=p.persistence, feature_size=p.feature_size)


def build_environment(cfg: PlannerConfig, grid: Optional[VoxelGrid] = None, seed_offset: int = 0) -> Environment:
    grid = grid if grid is not None else load_source_grid(cfg, seed_offset)
    inflated = grid.inflated(cfg.inflation_radius)
    route = inflated.with_clearance(cfg.route_clearance_voxels * inflated.resolution)
    return Environment(grid, inflated, DistanceIndex(inflated), route)


def snap_to_voxel(grid: VoxelGrid, p) -> np.ndarray:
    """Центр вокселя, содержащего p."""
    p = np.asarray(p, dtype=float)
    center = grid.index_to_world(grid.world_to_index(p))
    if not np.allclose(center, p, rtol=0.0, atol=1e-12):
        logger.warning(f"[PLAN] Точка {p.tolist()} смещена в центр вокселя {center.tolist()}")
    return center


# ============================================================================
# Этапы
# ============================================================================

def route_grid(env: Environment, start, goal) -> VoxelGrid:
    """
    Сетка этапа 1 для пары старт/цель. Воксели старта и цели, свободные в раздутой
    сетке, освобождаются и в сетке с запасом.
    """
    route = env.route
    if route is env.inflated:
        return route
    occ = None
    for p in (start, goal):
        idx = env.inflated.world_to_index(p)
        if env.inflated.is_occupied_index(idx) or not route.is_occupied_index(idx):
            continue
        if occ is None:
            occ = route.occupancy.copy()
        occ[tuple(int(i) for i in idx)] = False
    if occ is None:
        return route
    return VoxelGrid(occ, route.resolution, route.origin, route.inflation_radius)


def geometric_stage(env: Environment, start, goal) -> Tuple[GeometricPath, WaypointPath]:
    """
    Этап 1. Путь ищется в сетке с запасом, чтобы точки маршрута и отрезки между ними
    не касались углов препятствий. Если там пути нет - в раздутой сетке.
    При совпадении вокселей старта и цели маршрут - две одинаковые точки.
    """
    grid = route_grid(env, start, goal)
    try:
        path = astar_grid(grid, start, goal)
    except NoGeometricPathError:
        if grid is env.inflated:
            raise
        logger.warning("[ASTAR] Нет пути с запасом от препятствий, поиск по раздутой сетке")
        grid = env.inflated
        path = astar_grid(grid, start, goal)
    W = sparsify(grid, path)
    if len(W) == 1:
        W = WaypointPath(np.vstack([W.waypoints, W.waypoints]))
    return path, W


def velocity_stage(W: WaypointPath, cfg: PlannerConfig,
                   start_state: BoundaryState, goal_state: BoundaryState) -> VelocityGraph:
    """Этап 2: сэмплы скоростей, граф, обратное ДП."""
    samples = sample_velocities(W, cfg.velocity)
    G = build_velocity_graph(W, samples, start_state, goal_state)
    backward_cost_to_go(G, axis_accel_limits(cfg.limits))
    return G


def snapped_states(env: Environment, cfg: PlannerConfig) -> Tuple[BoundaryState, BoundaryState]:
    start, goal = cfg.start_state(), cfg.goal_state()
    start = BoundaryState(snap_to_voxel(env.inflated, start.position), start.velocity, start.acceleration)
    goal = BoundaryState(snap_to_voxel(env.inflated, goal.position), goal.velocity, goal.acceleration)
    return start, goal


@dataclass
class PlanResult:
    trajectory: StitchedTrajectory
    telemetry: Telemetry
    waypoints: WaypointPath
    geometric_path: GeometricPath
    graph: VelocityGraph
    search: SearchResult


def plan(cfg: PlannerConfig, env: Optional[Environment] = None,
         start_state: Optional[BoundaryState] = None,
         goal_state: Optional[BoundaryState] = None,
         heuristic: bool = True) -> PlanResult:
    """
    Этапы 1 -> 2 -> 3.

    Raises:
        InvalidEndpointError, NoGeometricPathError, InvalidStartError, GraphDisconnectedError
    """
    env = env if env is not None else build_environment(cfg)
    if start_state is None or goal_state is None:
        start_state, goal_state = snapped_states(env, cfg)
    timer = StageTimer()
    t0 = time.perf_counter()

    with timer.stage(STAGE_GEOMETRIC):
        path, W = geometric_stage(env, start_state.position, goal_state.position)
    with timer.stage(STAGE_VELOCITY):
        G = velocity_stage(W, cfg, start_state, goal_state)
    search = astar_mp(G, env.index, cfg, heuristic=heuristic, cache=SafeSphereCache(), timer=timer)

    telemetry = Telemetry(
        stage_times=dict(timer.totals),
        total_time=time.perf_counter() - t0,
        nodes_expanded=search.stats.nodes_expanded,
        edges_generated=search.stats.edges_generated,
        edges_pruned_collision=search.stats.edges_pruned_collision,
        edges_pruned_constraint=search.stats.edges_pruned_constraint,
        distance_queries=search.stats.distance_queries,
        cache_hits=search.stats.cache_hits,
        geometric_points=len(path),
        waypoints=len(W),
        samples_per_waypoint=len(G.layers[1]) if len(W) > 2 else 0,
        graph_nodes=G.num_nodes,
        graph_edges=G.num_edges,
    )
    logger.info(
        f"[PLAN] ✅ N={len(W)}, сегментов {len(search.trajectory)}, "
        f"T={search.trajectory.total_duration:.3f} с, {telemetry.total_time * 1e3:.1f} мс"
    )
    return PlanResult(search.trajectory, telemetry, W, path, G, search)


# ============================================================================
# Выборка состояний
# ============================================================================

def sample_times(duration: float, dt: float) -> np.ndarray:
    """0, dt, 2dt, ... и обязательно duration."""
    times = np.arange(0.0, duration, dt) if duration > 0.0 else np.array([0.0])
    if times[-1] < duration:
        times = np.append(times, duration)
    return times


def trajectory_rows(traj: StitchedTrajectory, limits: ConstraintLimits, dt: float) -> List[list]:
    """Строки CSV: t, позиция, скорость, ускорение, рывок, |f|, наклон (град), |ω|."""
    times = sample_times(traj.total_duration, dt)
    p, v, a, j = (traj.sample(times, order) for order in range(4))
    out = flat_outputs(a, j, limits.gravity)
    fn = np.linalg.norm(out.f, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        tilt = np.degrees(np.arccos(np.clip(out.f[:, 2] / fn, -1.0, 1.0)))
    tilt = np.where(out.singular, 0.0, tilt)
    rows = []
    for k, t in enumerate(times):
        rows.append([float(t), *p[k], *v[k], *a[k], *j[k], float(fn[k]), float(tilt[k]), float(out.omega_norm[k])])
    return rows


# ============================================================================
# Перепроверка результата
# ============================================================================

@dataclass
class Verification:
    constraint_violations: int = 0
    collisions: int = 0
    waypoint_error: float = 0.0
    seam_error: float = 0.0

    @property
    def ok(self) -> bool:
        return (self.constraint_violations == 0 and self.collisions == 0
                and self.waypoint_error <= WAYPOINT_TOL)


def verify(result: PlanResult, env: Environment, cfg: PlannerConfig, dense_dt: float = DENSE_CHECK_DT) -> Verification:
    """
    Независимая перепроверка: ограничения на сетке constraint_dt по каждому сегменту,
    занятость вокселей с шагом dense_dt, прохождение через точки маршрута.
    """
    traj = result.trajectory
    report = Verification()
    for seg in traj.segments:
        if check_constraints(seg, cfg.limits, cfg.constraint_dt) is not None:
            report.constraint_violations += 1
        pts = seg.sample(sample_times(seg.duration, dense_dt), 0)
        if env.inflated.occupied_points(pts).any():
            report.collisions += 1

    starts = np.array([seg.evaluate(0.0, 0) for seg in traj.segments])
    ends = np.array([seg.evaluate(seg.duration, 0) for seg in traj.segments])
    W = result.waypoints.waypoints
    report.waypoint_error = float(max(np.abs(starts - W[:-1]).max(), np.abs(ends - W[1:]).max()))
    errors = traj.seam_errors()
    report.seam_error = float(errors.max()) if errors.size else 0.0
    return report


# ============================================================================
# Бенчмарк
# ============================================================================

@dataclass
class TrialResult:
    row: Dict[str, object]
    stage_times: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.row["status"] == "ok"


def _free_centers(grid: VoxelGrid) -> np.ndarray:
    return grid.index_to_world(np.argwhere(~grid.occupancy))


def pick_endpoints(env: Environment, requested: int, rng: np.random.Generator,
                   retry_cap: int, min_separation: float) -> Optional[Tuple[np.ndarray, np.ndarray, int]]:
    """
    Случайные пары старт/цель, пока разрежение не даст ровно requested точек маршрута.
    Если за retry_cap попыток не вышло - лучшая найденная пара (ближайшее N).

    Returns:
        (старт, цель, N) или None, если ни одна пара не связана
    """
    free = _free_centers(env.route)
    if len(free) < 2:
        return None
    best = None
    for _ in range(retry_cap):
        a, b = rng.choice(len(free), size=2, replace=False)
        start, goal = free[a], free[b]
        if np.linalg.norm(goal - start) < min_separation:
            continue
        try:
            _, W = geometric_stage(env, start, goal)
        except NoGeometricPathError:
            continue
        n = len(W)
        if n == requested:
            return start, goal, n
        if best is None or abs(n - requested) < abs(best[2] - requested):
            best = (start, goal, n)
    return best


def run_trial(cfg: PlannerConfig, trial: int, env: Optional[Environment] = None) -> TrialResult:
    """
    Один прогон бенчмарка: выбор старт/цель, этапы 1-2, затем этап 3 дважды
    (A* с V_d* и Дейкстра) на одном и том же графе, перепроверка результата A*.
    Ошибки планировщика записываются в status, не прерывая серию.
    """
    bench = cfg.benchmark
    seed = cfg.seed * 100003 + trial
    rng = np.random.default_rng(seed)
    requested = bench.waypoints[trial % len(bench.waypoints)]
    row: Dict[str, object] = {
        "trial": trial, "seed": seed, "waypoints": 0, "samples": 0, "total_edges": 0,
        "astar_edges": 0, "dijkstra_edges": 0, "reduction_pct": math.nan,
        "astar_cost": math.nan, "dijkstra_cost": math.nan, "costs_equal": False,
        "constraint_violations": 0, "collisions": 0, "status": "ok",
    }

    try:
        if env is None:
            env = build_environment(cfg, seed_offset=trial if bench.vary_map else 0)
        picked = pick_endpoints(env, requested, rng, bench.retry_cap, bench.min_separation)
        if picked is None:
            row["status"] = "no_endpoints"
            return TrialResult(row)
        start, goal, n = picked
        if n != requested:
            logger.warning(f"[BENCH] Прогон {trial}: N={requested} не найдено, взято N={n}")

        start_state = BoundaryState.at_rest(start)
        goal_state = BoundaryState(goal, np.zeros(3))
        astar = plan(cfg, env, start_state, goal_state, heuristic=True)
        graph = astar.graph
        dijkstra = astar_mp(graph, env.index, cfg, heuristic=False, cache=SafeSphereCache())

        a_edges = astar.search.stats.edges_generated
        d_edges = dijkstra.stats.edges_generated
        report = verify(astar, env, cfg)
        row.update({
            "waypoints": len(astar.waypoints),
            "samples": astar.telemetry.samples_per_waypoint,
            "total_edges": graph.num_edges,
            "astar_edges": a_edges,
            "dijkstra_edges": d_edges,
            "reduction_pct": 100.0 * (d_edges - a_edges) / d_edges if d_edges else 0.0,
            "astar_cost": astar.search.cost,
            "dijkstra_cost": dijkstra.cost,
            "costs_equal": math.isclose(astar.search.cost, dijkstra.cost, rel_tol=COST_RTOL),
            "constraint_violations": report.constraint_violations,
            "collisions": report.collisions,
        })
        if not report.ok:
            row["status"] = "verification_failed"
        return TrialResult(row, dict(astar.telemetry.stage_times))

    except StitchError as e:
        logger.warning(f"[BENCH] Прогон {trial}: {type(e).__name__}: {e}")
        row["status"] = type(e).__name__
        return TrialResult(row)


def summarize(results: List[TrialResult]) -> dict:
    """Сводка по N: рёбра, среднее снижение числа рёбер, нарушения, средние времена этапов."""
    by_n: Dict[int, List[TrialResult]] = {}
    for r in results:
        if r.ok:
            by_n.setdefault(int(r.row["waypoints"]), []).append(r)

    groups = {}
    for n, items in sorted(by_n.items()):
        reductions = [float(r.row["reduction_pct"]) for r in items]
        stage_names = sorted({k for r in items for k in r.stage_times})
        groups[str(n)] = {
            "trials": len(items),
            "total_edges": sorted({int(r.row["total_edges"]) for r in items}),
            "mean_astar_edges": float(np.mean([r.row["astar_edges"] for r in items])),
            "mean_dijkstra_edges": float(np.mean([r.row["dijkstra_edges"] for r in items])),
            "mean_reduction_pct": float(np.mean(reductions)),
            "min_reduction_pct": float(np.min(reductions)),
            "mean_stage_times_s": {
                name: float(np.mean([r.stage_times.get(name, 0.0) for r in items])) for name in stage_names
            },
        }

    ok = [r for r in results if r.ok]
    failures: Dict[str, int] = {}
    for r in results:
        if not r.ok:
            failures[str(r.row["status"])] = failures.get(str(r.row["status"]), 0) + 1
    return {
        "trials": len(results),
        "succeeded": len(ok),
        "failures": failures,
        "costs_equal": sum(1 for r in ok if r.row["costs_equal"]),
        "constraint_violations": int(sum(int(r.row["constraint_violations"]) for r in results)),
        "collisions": int(sum(int(r.row["collisions"]) for r in results)),
        "mean_reduction_pct": float(np.mean([float(r.row["reduction_pct"]) for r in ok])) if ok else None,
        "by_waypoints": groups,
    }
