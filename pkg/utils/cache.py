# utils/cache.py
"""
Кэш безопасных сфер для проверки столкновений.
Хранилище в памяти, ключ - пара соседних точек маршрута.
"""
import logging
import threading
from typing import Dict, Hashable, List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class SafeSphereCache:
    """
    Набор свободных от препятствий шаров (центр, радиус) по ключу пары точек маршрута.

    Чтение без блокировки, вставка под блокировкой.
    """

    def __init__(self):
        self._store: Dict[Hashable, Tuple[List[np.ndarray], List[float]]] = {}
        self._arrays: Dict[Hashable, Tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()
        self.hits = 0

    def add(self, key: Hashable, center, radius: float) -> None:
        """
        Добавить сферу.

        Args:
            key: ключ пары точек маршрута
            center: центр, м
            radius: радиус (расстояние до ближайшего препятствия), м
        """
        with self._lock:
            centers, radii = self._store.setdefault(key, ([], []))
            centers.append(np.asarray(center, dtype=float).copy())
            radii.append(float(radius))
            self._arrays.pop(key, None)
        logger.debug(f"[CACHE] {key}: +сфера r={radius:.3f}")

    def spheres(self, key: Hashable) -> Tuple[np.ndarray, np.ndarray]:
        """Все сферы ключа: (центры (K, 3), радиусы (K,))."""
        cached = self._arrays.get(key)
        if cached is not None:
            return cached
        with self._lock:
            centers, radii = self._store.get(key, ([], []))
            arrays = (np.array(centers).reshape(-1, 3), np.array(radii, dtype=float))
            self._arrays[key] = arrays
        return arrays

    def find(self, key: Hashable, p) -> Optional[float]:
        """
        Наибольший запас R - ||p - c|| среди сфер, содержащих p.

        Returns:
            запас, м, или None если p не лежит ни в одной сфере
        """
        centers, radii = self.spheres(key)
        if radii.size == 0:
            return None
        margins = radii - np.linalg.norm(centers - np.asarray(p, dtype=float), axis=1)
        best = float(margins.max())
        if best <= 0.0:
            return None
        self.hits += 1
        return best

    def __len__(self) -> int:
        return sum(len(radii) for _, radii in self._store.values())
