# utils/noise.py
"""
Градиентный шум Перлина (улучшенный вариант с 12 рёбрами куба), векторизованный на numpy.
"""
import numpy as np


def make_permutation(rng: np.random.Generator) -> np.ndarray:
    """Таблица перестановок из 512 элементов (256 повторены дважды)."""
    p = rng.permutation(256)
    return np.concatenate([p, p]).astype(np.int64)


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _lerp(t, a, b):
    return a + t * (b - a)


def _grad(h: np.ndarray, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    h = h & 15
    u = np.where(h < 8, x, y)
    v = np.where(h < 4, y, np.where((h == 12) | (h == 14), x, z))
    return np.where(h & 1, -u, u) + np.where(h & 2, -v, v)


def perlin3(x: np.ndarray, y: np.ndarray, z: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Значение шума в точках (x, y, z); массивы одной формы."""
    xf, yf, zf = np.floor(x), np.floor(y), np.floor(z)
    X = xf.astype(np.int64) & 255
    Y = yf.astype(np.int64) & 255
    Z = zf.astype(np.int64) & 255
    x, y, z = x - xf, y - yf, z - zf
    u, v, w = _fade(x), _fade(y), _fade(z)

    A = perm[X] + Y
    AA = perm[A] + Z
    AB = perm[A + 1] + Z
    B = perm[X + 1] + Y
    BA = perm[B] + Z
    BB = perm[B + 1] + Z

    return _lerp(
        w,
        _lerp(v,
              _lerp(u, _grad(perm[AA], x, y, z), _grad(perm[BA], x - 1, y, z)),
              _lerp(u, _grad(perm[AB], x, y - 1, z), _grad(perm[BB], x - 1, y - 1, z))),
        _lerp(v,
              _lerp(u, _grad(perm[AA + 1], x, y, z - 1), _grad(perm[BA + 1], x - 1, y, z - 1)),
              _lerp(u, _grad(perm[AB + 1], x, y - 1, z - 1), _grad(perm[BB + 1], x - 1, y - 1, z - 1))),
    )


def fractal3(x: np.ndarray, y: np.ndarray, z: np.ndarray, perm: np.ndarray,
             octaves: int, persistence: float, offsets: np.ndarray) -> np.ndarray:
    """
    Сумма октав: частота удваивается, амплитуда умножается на persistence.
    Результат нормирован на сумму амплитуд и обрезан в [-1, 1].

    offsets: (octaves, 3) сдвиги координат для каждой октавы
    """
    total = np.zeros_like(x, dtype=float)
    amplitude, frequency, norm = 1.0, 1.0, 0.0
    for k in range(octaves):
        ox, oy, oz = offsets[k]
        total += amplitude * perlin3(x * frequency + ox, y * frequency + oy, z * frequency + oz, perm)
        norm += amplitude
        amplitude *= persistence
        frequency *= 2.0
    return np.clip(total / norm, -1.0, 1.0)
