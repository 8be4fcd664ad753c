# utils/__init__.py
"""
Вспомогательные модули планировщика.
"""

from .cache import SafeSphereCache
from .noise import make_permutation, perlin3, fractal3
from .timing import (
    StageTimer,
    Telemetry,
    STAGES,
    STAGE_GEOMETRIC,
    STAGE_VELOCITY,
    STAGE_MP,
    STAGE_CONSTRAINTS,
    STAGE_COLLISION,
)

__all__ = [
    'SafeSphereCache',
    'make_permutation',
    'perlin3',
    'fractal3',
    'StageTimer',
    'Telemetry',
    'STAGES',
    'STAGE_GEOMETRIC',
    'STAGE_VELOCITY',
    'STAGE_MP',
    'STAGE_CONSTRAINTS',
    'STAGE_COLLISION',
]
