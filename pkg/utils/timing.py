# utils/timing.py
"""
Секундомер этапов и запись телеметрии планирования.
"""
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict

# Категории времени (разбивка по компонентам планировщика)
STAGE_GEOMETRIC = "geometric_search"
STAGE_VELOCITY = "velocity_search"
STAGE_MP = "mp_search"
STAGE_CONSTRAINTS = "constraint_check"
STAGE_COLLISION = "collision_check"

STAGES = (STAGE_GEOMETRIC, STAGE_VELOCITY, STAGE_MP, STAGE_CONSTRAINTS, STAGE_COLLISION)


class StageTimer:
    """Накопительный секундомер: одна сумма на категорию, секунды."""

    def __init__(self):
        self.totals: Dict[str, float] = {name: 0.0 for name in STAGES}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.add(name, time.perf_counter() - t0)

    def add(self, name: str, seconds: float) -> None:
        self.totals[name] = self.totals.get(name, 0.0) + seconds


@dataclass
class Telemetry:
    """Счётчики поиска и времена этапов."""
    stage_times: Dict[str, float] = field(default_factory=dict)
    total_time: float = 0.0
    nodes_expanded: int = 0
    edges_generated: int = 0
    edges_pruned_collision: int = 0
    edges_pruned_constraint: int = 0
    distance_queries: int = 0
    cache_hits: int = 0
    geometric_points: int = 0
    waypoints: int = 0
    samples_per_waypoint: int = 0
    graph_nodes: int = 0
    graph_edges: int = 0

    def to_dict(self) -> dict:
        return {
            "stage_times_s": dict(self.stage_times),
            "total_time_s": self.total_time,
            "nodes_expanded": self.nodes_expanded,
            "edges_generated": self.edges_generated,
            "edges_pruned_collision": self.edges_pruned_collision,
            "edges_pruned_constraint": self.edges_pruned_constraint,
            "distance_queries": self.distance_queries,
            "cache_hits": self.cache_hits,
            "geometric_points": self.geometric_points,
            "waypoints": self.waypoints,
            "samples_per_waypoint": self.samples_per_waypoint,
            "graph_nodes": self.graph_nodes,
            "graph_edges": self.graph_edges,
        }
