# velocity_graph.py
"""
Этап 2: граф скоростей (точка маршрута × сэмпл скорости) и обратное динамическое
программирование со стоимостью ребра = минимальное время двойного интегратора.
Полученная стоимость до цели V_d* - эвристика для поиска по примитивам.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from geometric_path import WaypointPath
from primitives import BoundaryState, min_time_table

logger = logging.getLogger(__name__)


class VelocitySampleConfig(BaseModel):
    """Модули скоростей V_m, полуугол конуса направлений и число направлений на его границе."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    magnitudes: List[float] = Field(min_length=1)
    cone_half_angle: float = 10.0          # градусы
    boundary_direction_count: int = Field(default=2, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if min(self.magnitudes) < 0.0:
            raise ValueError("модули скоростей должны быть >= 0")
        if not 0.0 <= self.cone_half_angle < 90.0:
            raise ValueError(f"cone_half_angle должен быть в [0, 90): {self.cone_half_angle}")
        return self


# ============================================================================
# Сэмплирование скоростей
# ============================================================================

def _unit(v: np.ndarray) -> Optional[np.ndarray]:
    n = float(np.linalg.norm(v))
    return v / n if n > 0.0 else None


def cone_directions(center: np.ndarray, half_angle_deg: float, count: int) -> np.ndarray:
    """
    Центр конуса и count направлений, равномерно по азимуту на его границе.

    Первый базисный вектор - ось с наименьшей по модулю компонентой центра,
    ортогонализованная к центру.
    """
    c = center / np.linalg.norm(center)
    dirs = [c]
    if count > 0:
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(c)))] = 1.0
        e1 = axis - np.dot(axis, c) * c
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(c, e1)
        theta = math.radians(half_angle_deg)
        for k in range(count):
            phi = 2.0 * math.pi * k / count
            d = math.cos(theta) * c + math.sin(theta) * (math.cos(phi) * e1 + math.sin(phi) * e2)
            dirs.append(d / np.linalg.norm(d))
    return np.array(dirs)


def _dedup(vectors: List[np.ndarray], tol: float = 1e-12) -> np.ndarray:
    kept: List[np.ndarray] = []
    for v in vectors:
        if not any(np.allclose(v, k, rtol=0.0, atol=tol) for k in kept):
            kept.append(v)
    return np.array(kept).reshape(-1, 3)


def sample_velocities(W: WaypointPath, cfg: VelocitySampleConfig) -> List[np.ndarray]:
    """
    Наборы скоростей для каждой точки маршрута.

    Для внутренней точки w_i центр конуса - unit(w_{i+1} - w_{i-1})
    (если он нулевой - unit(w_{i+1} - w_i)). Все нулевые модули дают одну нулевую скорость.

    Returns:
        список длины N; для старта и цели - пустые массивы (0, 3)
    """
    pts = W.waypoints
    N = len(pts)
    out: List[np.ndarray] = [np.zeros((0, 3)) for _ in range(N)]
    for i in range(1, N - 1):
        center = _unit(pts[i + 1] - pts[i - 1])
        if center is None:
            center = _unit(pts[i + 1] - pts[i])
        if center is None:
            center = np.array([1.0, 0.0, 0.0])
        dirs = cone_directions(center, cfg.cone_half_angle, cfg.boundary_direction_count)
        vectors = []
        for m in cfg.magnitudes:
            if m == 0.0:
                vectors.append(np.zeros(3))
            else:
                vectors.extend(m * d for d in dirs)
        out[i] = _dedup(vectors)
    return out


# ============================================================================
# Граф скоростей
# ============================================================================

@dataclass(frozen=True)
class VelocityNode:
    node_id: int
    waypoint_index: int
    velocity: np.ndarray


class VelocityGraph:
    """
    Слоистый граф: слой i - скорости в точке w_i; соседние слои соединены полностью.

    После backward_cost_to_go хранит V_d* для каждого узла, матрицы стоимостей рёбер
    и ранжированные списки V_d(n, e) по исходящим рёбрам.
    """

    def __init__(self, waypoints: np.ndarray, layers: List[np.ndarray],
                 start_state: BoundaryState, goal_state: BoundaryState):
        self.waypoints = waypoints
        self.layers = layers
        self.start_state = start_state
        self.goal_state = goal_state
        self.nodes: List[VelocityNode] = []
        self.layer_ids: List[np.ndarray] = []
        for i, velocities in enumerate(layers):
            ids = np.arange(len(self.nodes), len(self.nodes) + len(velocities))
            self.layer_ids.append(ids)
            self.nodes.extend(VelocityNode(int(n), i, v) for n, v in zip(ids, velocities))

        self.u_max: Optional[np.ndarray] = None
        self.cost_to_go: Optional[np.ndarray] = None
        self.edge_costs: List[np.ndarray] = []
        self._ranked: List[np.ndarray] = []

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return sum(len(a) * len(b) for a, b in zip(self.layers, self.layers[1:]))

    @property
    def start_id(self) -> int:
        return 0

    @property
    def goal_id(self) -> int:
        return self.num_nodes - 1

    def _local(self, node_id: int):
        node = self.nodes[node_id]
        return node.waypoint_index, node_id - int(self.layer_ids[node.waypoint_index][0])

    def state(self, node_id: int) -> BoundaryState:
        """Позиция и скорость узла (ускорение свободно)."""
        node = self.nodes[node_id]
        return BoundaryState(self.waypoints[node.waypoint_index], node.velocity)

    def successors(self, node_id: int) -> np.ndarray:
        layer, _ = self._local(node_id)
        if layer + 1 >= self.num_layers:
            return np.array([], dtype=int)
        return self.layer_ids[layer + 1]

    def ranked_edges(self, node_id: int) -> List[tuple]:
        """
        Ранжированный список (V_d(n, e), id преемника) по возрастанию.
        """
        self._require_costs()
        layer, local = self._local(node_id)
        if layer + 1 >= self.num_layers:
            return []
        order = self._ranked[layer][local]
        values = self.edge_costs[layer][local] + self.cost_to_go[self.layer_ids[layer + 1]]
        return [(float(values[j]), int(self.layer_ids[layer + 1][j])) for j in order]

    def edge_cost(self, node_id: int, succ_id: int) -> float:
        """l(n, e) = T_d* между состояниями узлов."""
        self._require_costs()
        layer, local = self._local(node_id)
        _, succ_local = self._local(succ_id)
        return float(self.edge_costs[layer][local, succ_local])

    def _require_costs(self):
        if self.cost_to_go is None:
            raise RuntimeError("Сначала нужно вызвать backward_cost_to_go")

    def to_dict(self) -> dict:
        """Отладочный дамп: узлы, рёбра со стоимостями, V_d*."""
        data = {
            "waypoints": self.waypoints.tolist(),
            "nodes": [
                {"id": n.node_id, "waypoint": n.waypoint_index, "velocity": n.velocity.tolist(),
                 "cost_to_go": None if self.cost_to_go is None else float(self.cost_to_go[n.node_id])}
                for n in self.nodes
            ],
            "num_nodes": self.num_nodes,
            "num_edges": self.num_edges,
        }
        if self.cost_to_go is not None:
            edges = []
            for layer, costs in enumerate(self.edge_costs):
                src, dst = self.layer_ids[layer], self.layer_ids[layer + 1]
                for a in range(len(src)):
                    for b in range(len(dst)):
                        edges.append([int(src[a]), int(dst[b]), float(costs[a, b])])
            data["edges"] = edges
            data["u_max"] = self.u_max.tolist()
        return data


def build_velocity_graph(W: WaypointPath, samples: List[np.ndarray],
                         start_state: BoundaryState, goal_state: BoundaryState) -> VelocityGraph:
    """
    Строит граф скоростей. Столкновения и ограничения на этом этапе не проверяются.

    |N| = (N-2)M + 2, |E| = (N-3)M² + 2M при N > 2.
    """
    pts = W.waypoints
    N = len(pts)
    if N < 2:
        raise ValueError(f"Нужно минимум 2 точки маршрута, получено {N}")
    layers = [start_state.velocity.reshape(1, 3)]
    layers.extend(np.asarray(samples[i]).reshape(-1, 3) for i in range(1, N - 1))
    layers.append(goal_state.velocity.reshape(1, 3))
    graph = VelocityGraph(pts, layers, start_state, goal_state)
    logger.info(f"[VGRAPH] N={N}: узлов {graph.num_nodes}, рёбер {graph.num_edges}")
    return graph


def backward_cost_to_go(G: VelocityGraph, u_max) -> np.ndarray:
    """
    Уравнение Беллмана от цели назад: V_d(n, e) = l(n, e) + V_d*(phi(n, e)),
    V_d*(n) = min_e V_d(n, e), l(n, e) = min_time_3d.

    Args:
        G: граф
        u_max: скаляр или 3-вектор предельных ускорений по осям

    Returns:
        V_d* для всех узлов (также сохраняется в G)
    """
    u = np.broadcast_to(np.asarray(u_max, dtype=float), (3,)).copy()
    V = np.zeros(G.num_nodes)
    edge_costs: List[Optional[np.ndarray]] = [None] * (G.num_layers - 1)
    ranked: List[Optional[np.ndarray]] = [None] * (G.num_layers - 1)

    for layer in range(G.num_layers - 2, -1, -1):
        L = min_time_table(G.waypoints[layer], G.layers[layer],
                           G.waypoints[layer + 1], G.layers[layer + 1], u)
        Vd = L + V[G.layer_ids[layer + 1]][None, :]
        V[G.layer_ids[layer]] = Vd.min(axis=1)
        edge_costs[layer] = L
        ranked[layer] = np.argsort(Vd, axis=1, kind="stable")

    G.u_max = u
    G.cost_to_go = V
    G.edge_costs = edge_costs
    G._ranked = ranked
    logger.info(f"[VGRAPH] V_d*(старт) = {V[G.start_id]:.3f} с")
    return V
