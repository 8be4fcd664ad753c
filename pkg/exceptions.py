# exceptions.py
"""
Иерархия ошибок планировщика.
Каждая ошибка знает свой код выхода для CLI.
"""
from constants import (
    EXIT_UNEXPECTED,
    EXIT_INVALID_CONFIG,
    EXIT_NO_GEOMETRIC_PATH,
    EXIT_GRAPH_DISCONNECTED,
    EXIT_INVALID_START,
    EXIT_GRID_FILE,
)


class StitchError(Exception):
    """Базовая ошибка планировщика"""
    exit_code = EXIT_UNEXPECTED


# ============================================================================
# Решатели
# ============================================================================

class ParameterError(StitchError, ValueError):
    """Недопустимый параметр решателя (u_max <= 0, T <= 0, rho <= 1 ...)"""


class ConditioningError(StitchError, ArithmeticError):
    """Слишком малое T для устойчивого решения"""


class RootFindingError(StitchError, ArithmeticError):
    """Не найден положительный вещественный корень dJ/dT = 0"""


class DomainError(StitchError, ValueError):
    """Время вне [0, T]"""


class StitchBoundaryError(StitchError, ValueError):
    """Соседние сегменты не совпадают на стыке"""


# ============================================================================
# Файлы сетки
# ============================================================================

class GridFormatError(StitchError):
    """Ошибка файла сетки"""
    exit_code = EXIT_GRID_FILE


class GridHeaderError(GridFormatError):
    """Испорченный заголовок"""


class GridPayloadError(GridFormatError):
    """Размер данных не совпадает с размерами сетки"""


class GridReadError(GridFormatError):
    """Файл не читается"""


# ============================================================================
# Планирование
# ============================================================================

class InvalidEndpointError(StitchError):
    """Старт или цель в занятой ячейке"""
    exit_code = EXIT_INVALID_START


class NoGeometricPathError(StitchError):
    """Старт и цель не связаны в сетке"""
    exit_code = EXIT_NO_GEOMETRIC_PATH


class GraphDisconnectedError(StitchError):
    """Граф примитивов разорван: открытое множество исчерпано до цели"""
    exit_code = EXIT_GRAPH_DISCONNECTED


class InvalidStartError(StitchError):
    """Начальное состояние нарушает ограничения"""
    exit_code = EXIT_INVALID_START


class ConfigError(StitchError, ValueError):
    """Конфигурация не прошла проверку"""
    exit_code = EXIT_INVALID_CONFIG
