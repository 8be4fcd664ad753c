#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Тесты командной строки: plan, benchmark, gen-env и коды выхода.

Использование:
    python test_cli.py
"""
import io
import json
import os
import sys
import tempfile

# Настройка кодировки для Windows
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

from cli import main as cli_main
from constants import (
    EXIT_OK, EXIT_INVALID_CONFIG, EXIT_NO_GEOMETRIC_PATH, EXIT_GRID_FILE,
    TRAJECTORY_JSON, TRAJECTORY_CSV, TELEMETRY_JSON, VELOCITY_GRAPH_JSON,
    TRIALS_CSV, SUMMARY_JSON, TRAJECTORY_CSV_COLUMNS, TRIALS_CSV_COLUMNS,
)
from environment import load_grid, save_grid
from scripts.mock_worlds import config_dict, empty_box, walled_goal
from storage.results import load_csv, load_json


# Цвета для терминала
class Colors:
    GREEN = '\033[92m'
    RED = '\033[91m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    RESET = '\033[0m'
    BOLD = '\033[1m'

def print_success(text):
    print(f"{Colors.GREEN}✓{Colors.RESET} {text}")

def print_error(text):
    print(f"{Colors.RED}✗{Colors.RESET} {text}")

def print_info(text):
    print(f"{Colors.BLUE}ℹ{Colors.RESET} {text}")

def print_header(text):
    print(f"\n{Colors.BOLD}{Colors.YELLOW}{'='*70}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.YELLOW}{text:^70}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.YELLOW}{'='*70}{Colors.RESET}\n")


def write_config(folder: str, name: str, data: dict) -> str:
    path = os.path.join(folder, name)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
    return path


def read_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


# ============================================================================
# ТЕСТЫ
# ============================================================================

def test_plan_empty_map():
    """plan на пустой карте: код 0, две точки маршрута, все выходные файлы"""
    print_header("ТЕСТ 1: plan на пустой карте")
    with tempfile.TemporaryDirectory() as tmp:
        grid_path = os.path.join(tmp, "empty.grid")
        save_grid(empty_box((20, 20, 10), 0.5), grid_path)
        cfg = write_config(tmp, "cfg.json", config_dict([1.25, 1.25, 1.25], [5.25, 4.25, 1.25], grid_path))

        out = os.path.join(tmp, "out")
        assert cli_main(["plan", "--config", cfg, "--out", out, "--dump-graph"]) == EXIT_OK
        trajectory = load_json(os.path.join(out, TRAJECTORY_JSON))
        assert len(trajectory["waypoints"]) == 2
        assert len(trajectory["trajectory"]["segments"]) == 1
        assert trajectory["trajectory"]["total_duration"] > 0.0

        telemetry = load_json(os.path.join(out, TELEMETRY_JSON))
        assert telemetry["waypoints"] == 2 and telemetry["edges_generated"] == 1
        assert "mp_search" in telemetry["stage_times_s"]

        rows = load_csv(os.path.join(out, TRAJECTORY_CSV))
        assert rows and list(rows[0].keys()) == TRAJECTORY_CSV_COLUMNS
        assert float(rows[0]["t"]) == 0.0
        assert abs(float(rows[-1]["t"]) - trajectory["trajectory"]["total_duration"]) < 1e-12

        graph = load_json(os.path.join(out, VELOCITY_GRAPH_JSON))
        assert graph["num_nodes"] == 2 and len(graph["edges"]) == 1
        print_success(f"Траектория {trajectory['trajectory']['total_duration']:.3f} с, {len(rows)} строк CSV")

        out2 = os.path.join(tmp, "out2")
        assert cli_main(["plan", "--config", cfg, "--out", out2]) == EXIT_OK
        assert read_bytes(os.path.join(out, TRAJECTORY_JSON)) == read_bytes(os.path.join(out2, TRAJECTORY_JSON))
        assert read_bytes(os.path.join(out, TRAJECTORY_CSV)) == read_bytes(os.path.join(out2, TRAJECTORY_CSV))
        assert not os.path.exists(os.path.join(out2, VELOCITY_GRAPH_JSON))
        print_success("Повторный запуск даёт побайтно тот же trajectory.json")


def test_exit_codes():
    """Коды выхода: нет пути, неверная конфигурация, битый файл сетки"""
    print_header("ТЕСТ 2: Коды выхода")
    with tempfile.TemporaryDirectory() as tmp:
        boxed = os.path.join(tmp, "boxed.grid")
        save_grid(walled_goal(9), boxed)
        cfg = write_config(tmp, "boxed.json", config_dict([0.5, 0.5, 0.5], [4.5, 4.5, 4.5], boxed))
        assert cli_main(["plan", "--config", cfg, "--out", tmp]) == EXIT_NO_GEOMETRIC_PATH
        print_success("Цель в закрытой коробке -> 3")

        bad = write_config(tmp, "bad.json", config_dict([0.5, 0.5, 0.5], [4.5, 4.5, 4.5], boxed, rho=0.5))
        assert cli_main(["plan", "--config", bad, "--out", tmp]) == EXIT_INVALID_CONFIG
        unknown = write_config(tmp, "unknown.json", config_dict([0.5, 0.5, 0.5], [1.5, 0.5, 0.5], boxed, colour="red"))
        assert cli_main(["plan", "--config", unknown, "--out", tmp]) == EXIT_INVALID_CONFIG
        assert cli_main(["plan", "--config", os.path.join(tmp, "missing.json"), "--out", tmp]) == EXIT_INVALID_CONFIG
        assert cli_main(["benchmark", "--config", bad, "--trials", "0", "--out", tmp]) == EXIT_INVALID_CONFIG
        print_success("Неверная конфигурация -> 2")

        broken = os.path.join(tmp, "broken.grid")
        with open(broken, "wb") as f:
            f.write(b"not a grid\n")
        cfg = write_config(tmp, "broken.json", config_dict([0.5, 0.5, 0.5], [1.5, 0.5, 0.5], broken))
        assert cli_main(["plan", "--config", cfg, "--out", tmp]) == EXIT_GRID_FILE
        print_success("Битый файл сетки -> 6")


def test_gen_env():
    """gen-env детерминирован; ошибка параметров - код 2"""
    print_header("ТЕСТ 3: gen-env")
    with tempfile.TemporaryDirectory() as tmp:
        args = ["gen-env", "--seed", "3", "--dims", "24,24,6", "--resolution", "0.5", "--threshold", "0.2"]
        a, b, c = (os.path.join(tmp, name) for name in ("a.grid", "b.grid", "c.grid"))
        assert cli_main(args + ["--out", a]) == EXIT_OK
        assert cli_main(args + ["--out", b]) == EXIT_OK
        assert read_bytes(a) == read_bytes(b)
        other = ["gen-env", "--seed", "4", "--dims", "24,24,6", "--resolution", "0.5", "--threshold", "0.2"]
        assert cli_main(other + ["--out", c]) == EXIT_OK
        assert read_bytes(a) != read_bytes(c)
        grid = load_grid(a)
        assert grid.dims == (24, 24, 6) and grid.resolution == 0.5
        print_success("Одинаковые параметры -> одинаковые файлы")

        bad = ["gen-env", "--seed", "3", "--dims", "24,24,6", "--resolution", "-1", "--threshold", "0.2"]
        assert cli_main(bad + ["--out", os.path.join(tmp, "d.grid")]) == EXIT_INVALID_CONFIG
        print_success("Отрицательное разрешение -> 2")


def test_benchmark():
    """Короткий бенчмарк: trials.csv и summary.json"""
    print_header("ТЕСТ 4: benchmark")
    with tempfile.TemporaryDirectory() as tmp:
        data = {
            "start": {"position": [0.25, 0.25, 0.25]},
            "goal": {"position": [0.25, 0.25, 0.25]},
            "grid": {"perlin": {"seed": 2, "dims": [24, 24, 6], "resolution": 0.5, "threshold": 0.3}},
            "inflation_radius": 0.0,
            "velocity": {"magnitudes": [0.0, 1.0, 2.0]},
            "rho": 100.0,
            "benchmark": {"waypoints": [2, 3], "retry_cap": 20, "min_separation": 3.0, "vary_map": False},
        }
        cfg = write_config(tmp, "bench.json", data)
        assert cli_main(["benchmark", "--config", cfg, "--trials", "3", "--out", tmp, "--workers", "1"]) == EXIT_OK

        rows = load_csv(os.path.join(tmp, TRIALS_CSV))
        assert len(rows) == 3 and list(rows[0].keys()) == TRIALS_CSV_COLUMNS
        summary = load_json(os.path.join(tmp, SUMMARY_JSON))
        assert summary["trials"] == 3
        assert summary["succeeded"] + sum(summary["failures"].values()) == 3
        assert summary["succeeded"] >= 1, f"нет успешных прогонов: {summary['failures']}"
        for row in rows:
            if row["status"] == "ok":
                assert row["costs_equal"] == "True"
                assert int(row["astar_edges"]) <= int(row["dijkstra_edges"])
        print_info(f"Успешно {summary['succeeded']}/3, отказы: {summary['failures']}")
        print_success("Файлы бенчмарка записаны")


# ============================================================================
# ЗАПУСК
# ============================================================================

def main():
    """Запуск всех тестов"""
    print(f"\n{Colors.BOLD}{Colors.BLUE}Тестирование командной строки{Colors.RESET}\n")

    tests = [
        ("plan на пустой карте", test_plan_empty_map),
        ("Коды выхода", test_exit_codes),
        ("gen-env", test_gen_env),
        ("benchmark", test_benchmark),
    ]

    results = []
    for test_name, test_func in tests:
        try:
            test_func()
            results.append((test_name, True))
        except Exception as e:
            print_error(f"Ошибка в тесте '{test_name}': {type(e).__name__}: {e}")
            results.append((test_name, False))

    print_header("РЕЗУЛЬТАТЫ ТЕСТИРОВАНИЯ")
    passed = sum(1 for _, result in results if result)
    for test_name, result in results:
        status = f"{Colors.GREEN}✓ PASSED{Colors.RESET}" if result else f"{Colors.RED}✗ FAILED{Colors.RESET}"
        print(f"  {status}  {test_name}")
    print(f"\n{Colors.BOLD}Итого: {passed}/{len(results)} тестов пройдено{Colors.RESET}\n")

    if passed != len(results):
        sys.exit(1)


if __name__ == "__main__":
    main()
