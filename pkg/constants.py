# constants.py
"""
Константы планировщика.
Все магические числа, строки формата файлов и коды выхода централизованы здесь.
"""

# ============================================================================
# Физика и ограничения аппарата (значения по умолчанию из экспериментов)
# ============================================================================
GRAVITY = 9.81                 # м/с², ось z направлена вверх
F_MIN = 0.85                   # м/с², минимальная нормированная тяга
F_MAX = 18.75                  # м/с², максимальная нормированная тяга
THETA_MAX_DEG = 60.0           # град, максимальный наклон
OMEGA_MAX = 6.0                # рад/с
V_MAX = 10.0                   # м/с
RHO = 1000.0                   # штраф за время

# ============================================================================
# Сэмплирование скоростей
# ============================================================================
MAGNITUDE_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)
CONE_HALF_ANGLE_DEG = 10.0     # конус 20° => полуугол 10°
BOUNDARY_DIRECTIONS = 2

# ============================================================================
# Проверки
# ============================================================================
CONSTRAINT_DT = 0.1            # с, шаг проверки ограничений
COLLISION_DT_MIN = 1e-3        # с, минимальный шаг адаптивной проверки столкновений
SINGULAR_THRUST = 1e-9         # м/с², ниже этого тяга считается вырожденной
INFLATION_RADIUS = 0.3         # м
ROUTE_CLEARANCE_VOXELS = 1.75   # запас маршрута этапа 1: все 26 соседей занятого вокселя

# Виды нарушений (схема отчёта о нарушении)
KIND_THRUST = "thrust"
KIND_TILT = "tilt"
KIND_VELOCITY = "velocity"
KIND_OMEGA = "omega"
KIND_COLLISION = "collision"
KIND_SINGULAR = "singular"

# ============================================================================
# Численные допуски
# ============================================================================
CONTINUITY_TOL = 1e-9
LIMIT_RTOL = 1e-9              # относительный запас при сравнении с пределами (округление)
ROOT_IMAG_TOL = 1e-8
LQMT_T_MIN = 1e-3              # с, нижняя граница T* для несовпадающих состояний
LQMT_T_CONDITIONING = 1e-6     # с, ниже этого решение плохо обусловлено
NEWTON_POLISH_STEPS = 3

# ============================================================================
# Шум Перлина
# ============================================================================
PERLIN_OCTAVES = 4
PERLIN_PERSISTENCE = 0.5
PERLIN_FEATURE_SIZE = 5.0      # м, период первой октавы
PERLIN_THRESHOLD = 0.2

# ============================================================================
# Формат файла сетки
# ============================================================================
GRID_MAGIC = "stitchgrid"
GRID_VERSION = "v1"

# ============================================================================
# Выходные файлы
# ============================================================================
TRAJECTORY_JSON = "trajectory.json"
TRAJECTORY_CSV = "trajectory.csv"
TELEMETRY_JSON = "telemetry.json"
VELOCITY_GRAPH_JSON = "velocity_graph.json"
TRIALS_CSV = "trials.csv"
SUMMARY_JSON = "summary.json"

TRAJECTORY_CSV_COLUMNS = [
    "t", "x", "y", "z",
    "vx", "vy", "vz",
    "ax", "ay", "az",
    "jx", "jy", "jz",
    "thrust_norm", "tilt_deg", "omega_norm",
]

TRIALS_CSV_COLUMNS = [
    "trial", "seed", "waypoints", "samples", "total_edges",
    "astar_edges", "dijkstra_edges", "reduction_pct",
    "astar_cost", "dijkstra_cost", "costs_equal",
    "constraint_violations", "collisions", "status",
]

# ============================================================================
# Коды выхода CLI
# ============================================================================
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID_CONFIG = 2
EXIT_NO_GEOMETRIC_PATH = 3
EXIT_GRAPH_DISCONNECTED = 4
EXIT_INVALID_START = 5
EXIT_GRID_FILE = 6

# ============================================================================
# Бенчмарк
# ============================================================================
BENCH_RETRY_CAP = 200
BENCH_MIN_SEPARATION = 5.0     # м, минимальное расстояние старт-цель
DENSE_CHECK_DT = 1e-3          # с, плотная перепроверка столкновений
