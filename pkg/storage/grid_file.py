# storage/grid_file.py
"""
Файл сетки занятости.

Формат: строка заголовка
    stitchgrid v1 <nx> <ny> <nz> <resolution> <ox> <oy> <oz>\\n
и ровно ceil(nx*ny*nz/8) байт: биты занятости, x быстрее всего, затем y, затем z,
внутри байта - младший бит первым.
"""
import logging
import math
import os
from typing import Tuple

import numpy as np

from constants import GRID_MAGIC, GRID_VERSION
from exceptions import GridHeaderError, GridPayloadError, GridReadError

logger = logging.getLogger(__name__)


def write_grid_file(path: str, occupancy: np.ndarray, resolution: float, origin: np.ndarray) -> None:
    """
    Атомарно сохраняет сетку (через временный файл).

    Args:
        path: путь к файлу
        occupancy: булев массив (nx, ny, nz)
        resolution: размер вокселя, м
        origin: начало координат сетки, м
    """
    nx, ny, nz = occupancy.shape
    ox, oy, oz = (float(v) for v in origin)
    header = f"{GRID_MAGIC} {GRID_VERSION} {nx} {ny} {nz} {float(resolution)!r} {ox!r} {oy!r} {oz!r}\n"
    payload = np.packbits(occupancy.ravel(order="F").astype(np.uint8), bitorder="little")

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    temp_file = path + ".tmp"
    try:
        with open(temp_file, "wb") as f:
            f.write(header.encode("ascii"))
            f.write(payload.tobytes())
        os.replace(temp_file, path)
        logger.info(f"[IO] Сетка {nx}x{ny}x{nz} сохранена в {path}")
    except Exception as e:
        logger.error(f"[IO] Ошибка сохранения сетки: {e}")
        if os.path.exists(temp_file):
            os.remove(temp_file)
        raise


def _parse_header(line: bytes) -> Tuple[Tuple[int, int, int], float, np.ndarray]:
    try:
        tokens = line.decode("ascii").split()
    except UnicodeDecodeError as e:
        raise GridHeaderError(f"Заголовок не ASCII: {e}") from e
    if len(tokens) != 9 or tokens[0] != GRID_MAGIC or tokens[1] != GRID_VERSION:
        raise GridHeaderError(f"Неверный заголовок: {line[:80]!r}")
    try:
        dims = tuple(int(t) for t in tokens[2:5])
        resolution = float(tokens[5])
        origin = np.array([float(t) for t in tokens[6:9]])
    except ValueError as e:
        raise GridHeaderError(f"Нечисловое поле заголовка: {e}") from e
    if min(dims) < 1:
        raise GridHeaderError(f"Размеры должны быть >= 1: {dims}")
    if not (math.isfinite(resolution) and resolution > 0.0):
        raise GridHeaderError(f"Разрешение должно быть > 0: {resolution}")
    if not np.all(np.isfinite(origin)):
        raise GridHeaderError(f"Нечисловое начало координат: {origin}")
    return dims, resolution, origin


def read_grid_file(path: str) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Читает сетку.

    Returns:
        (occupancy, resolution, origin)

    Raises:
        GridReadError, GridHeaderError, GridPayloadError
    """
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise GridReadError(f"Не удалось прочитать {path}: {e}") from e

    newline = raw.find(b"\n")
    if newline < 0:
        raise GridHeaderError(f"В {path} нет строки заголовка")
    dims, resolution, origin = _parse_header(raw[:newline])

    count = dims[0] * dims[1] * dims[2]
    payload = raw[newline + 1:]
    expected = (count + 7) // 8
    if len(payload) != expected:
        raise GridPayloadError(f"Ожидалось {expected} байт данных, получено {len(payload)}")

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=count, bitorder="little")
    occupancy = bits.astype(bool).reshape(dims, order="F")
    logger.info(f"[IO] Загружена сетка {dims[0]}x{dims[1]}x{dims[2]} из {path}")
    return occupancy, resolution, origin
