# cli.py
"""
Командная строка планировщика.

    python cli.py plan --config cfg.json --out out/ [--dump-graph]
    python cli.py benchmark --config cfg.json --trials 50 --out out/ [--workers 4]
    python cli.py gen-env --seed 1 --dims 100,100,10 --resolution 0.5 --threshold 0.2 --out world.grid
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from config import BENCH_WORKERS, LOG_FORMAT, LOG_LEVEL, OUTPUT_DIR, load_planner_config
from constants import (
    EXIT_OK, EXIT_UNEXPECTED, EXIT_INVALID_CONFIG,
    TRAJECTORY_JSON, TRAJECTORY_CSV, TELEMETRY_JSON, VELOCITY_GRAPH_JSON,
    TRIALS_CSV, SUMMARY_JSON, TRAJECTORY_CSV_COLUMNS, TRIALS_CSV_COLUMNS,
    PERLIN_OCTAVES, PERLIN_PERSISTENCE, PERLIN_FEATURE_SIZE,
)
from environment import generate_perlin, save_grid
from exceptions import ConfigError, ParameterError, StitchError
from pipeline import build_environment, plan, run_trial, summarize, trajectory_rows
from storage.results import save_csv, save_json

logger = logging.getLogger(__name__)


# ============================================================================
# Команды
# ============================================================================

def cmd_plan(config_path: str, out_dir: str, dump_graph: bool = False) -> int:
    """Этапы 1 -> 2 -> 3 и запись trajectory.json, trajectory.csv, telemetry.json."""
    cfg = load_planner_config(config_path)
    result = plan(cfg)

    trajectory = {
        "trajectory": result.trajectory.to_dict(),
        "waypoints": result.waypoints.to_list(),
        "rho": cfg.rho,
        "edge_cost": cfg.edge_cost,
    }
    telemetry = result.telemetry.to_dict()
    telemetry["waypoint_positions"] = result.waypoints.to_list()
    telemetry["pruned_by_kind"] = dict(result.search.stats.pruned_by_kind)

    save_json(os.path.join(out_dir, TRAJECTORY_JSON), trajectory)
    save_csv(os.path.join(out_dir, TRAJECTORY_CSV), TRAJECTORY_CSV_COLUMNS,
             trajectory_rows(result.trajectory, cfg.limits, cfg.constraint_dt))
    save_json(os.path.join(out_dir, TELEMETRY_JSON), telemetry)
    if dump_graph:
        save_json(os.path.join(out_dir, VELOCITY_GRAPH_JSON), result.graph.to_dict())
    return EXIT_OK


def cmd_benchmark(config_path: str, trials: int, out_dir: str, workers: int = 1) -> int:
    """
    Серия прогонов: A* против Дейкстры на одинаковых графах.
    Ошибки отдельных прогонов записываются в trials.csv и не прерывают серию.
    """
    if trials < 1:
        logger.error("[BENCH] Число прогонов должно быть >= 1")
        return EXIT_INVALID_CONFIG
    cfg = load_planner_config(config_path)
    logger.info(f"[BENCH] 🚀 {trials} прогонов, процессов: {workers}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, [cfg] * trials, range(trials)))
    else:
        shared_env = None if cfg.benchmark.vary_map else build_environment(cfg)
        results = [run_trial(cfg, trial, shared_env) for trial in range(trials)]

    save_csv(os.path.join(out_dir, TRIALS_CSV), TRIALS_CSV_COLUMNS,
             ([r.row[c] for c in TRIALS_CSV_COLUMNS] for r in results))
    summary = summarize(results)
    save_json(os.path.join(out_dir, SUMMARY_JSON), summary)

    print(f"\n{'N':>3} {'trials':>7} {'total':>7} {'A*':>9} {'Dijkstra':>9} {'% red.':>7}")
    for n, group in summary["by_waypoints"].items():
        total = ",".join(str(e) for e in group["total_edges"])
        print(f"{n:>3} {group['trials']:>7} {total:>7} {group['mean_astar_edges']:>9.1f} "
              f"{group['mean_dijkstra_edges']:>9.1f} {group['mean_reduction_pct']:>7.2f}")
    print(f"\nуспешно: {summary['succeeded']}/{summary['trials']}, "
          f"нарушений: {summary['constraint_violations']}, столкновений: {summary['collisions']}\n")
    return EXIT_OK


def cmd_gen_env(seed: int, dims, resolution: float, threshold: float, out_path: str,
                octaves: int = PERLIN_OCTAVES, persistence: float = PERLIN_PERSISTENCE,
                feature_size: float = PERLIN_FEATURE_SIZE, inflation: float = 0.0) -> int:
    """Сетка из шума Перлина в файл; одинаковые параметры дают побайтно одинаковый файл."""
    try:
        grid = generate_perlin(seed, dims, resolution, threshold, octaves=octaves,
                               persistence=persistence, feature_size=feature_size)
        if inflation > 0.0:
            grid = grid.inflated(inflation)
    except ParameterError as e:
        raise ConfigError(str(e)) from e
    save_grid(grid, out_path)
    print(f"occupancy: {grid.occupied_fraction():.4f}")
    return EXIT_OK


# ============================================================================
# Разбор аргументов
# ============================================================================

def _dims(text: str) -> List[int]:
    try:
        dims = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается nx,ny,nz: {text}")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"ожидается три целых >= 1: {text}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stitch", description="Планировщик траекторий из склеенных примитивов")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="спланировать траекторию")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=OUTPUT_DIR)
    p.add_argument("--dump-graph", action="store_true", help="записать velocity_graph.json")

    b = sub.add_parser("benchmark", help="A* против Дейкстры на серии случайных задач")
    b.add_argument("--config", required=True)
    b.add_argument("--trials", type=int, required=True)
    b.add_argument("--out", default=OUTPUT_DIR)
    b.add_argument("--workers", type=int, default=BENCH_WORKERS)

    g = sub.add_parser("gen-env", help="сгенерировать сетку шумом Перлина")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--dims", type=_dims, required=True)
    g.add_argument("--resolution", type=float, required=True)
    g.add_argument("--threshold", type=float, required=True)
    g.add_argument("--octaves", type=int, default=PERLIN_OCTAVES)
    g.add_argument("--persistence", type=float, default=PERLIN_PERSISTENCE)
    g.add_argument("--feature-size", type=float, default=PERLIN_FEATURE_SIZE)
    g.add_argument("--inflation", type=float, default=0.0)
    g.add_argument("--out", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа; возвращает код выхода."""
    logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.INFO), format=LOG_FORMAT)
    args = build_parser().parse_args(argv)

    try:
        if args.command == "plan":
            return cmd_plan(args.config, args.out, args.dump_graph)
        if args.command == "benchmark":
            return cmd_benchmark(args.config, args.trials, args.out, args.workers)
        return cmd_gen_env(args.seed, args.dims, args.resolution, args.threshold, args.out,
                           octaves=args.octaves, persistence=args.persistence,
                           feature_size=args.feature_size, inflation=args.inflation)
    except StitchError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"❌ Непредвиденная ошибка: {e}", exc_info=True)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
