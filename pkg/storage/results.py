# storage/results.py
"""
Запись результатов: JSON (атомарно, с сортировкой ключей) и CSV.
"""

import csv
import json
import os
from typing import Iterable, List, Sequence
import logging

import numpy as np

logger = logging.getLogger(__name__)


def _ensure_dir(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_json(path: str, data: dict) -> None:
    """
    Атомарно сохраняет данные в JSON файл.
    Использует временный файл для безопасной записи.

    Args:
        path: путь к файлу
        data: словарь (ключи сортируются, чтобы вывод был побайтно воспроизводим)
    """
    _ensure_dir(path)
    temp_file = path + ".tmp"

    try:
        with open(temp_file, 'w', encoding='utf-8') as f:
            json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(temp_file, path)
        logger.info(f"[IO] Сохранено: {path}")

    except Exception as e:
        logger.error(f"[IO] Ошибка сохранения {path}: {e}")
        if os.path.exists(temp_file):
            os.remove(temp_file)
        raise


def load_json(path: str) -> dict:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> int:
    """
    Сохраняет таблицу в CSV (заголовок + строки).

    Returns:
        число записанных строк
    """
    _ensure_dir(path)
    temp_file = path + ".tmp"
    count = 0
    try:
        with open(temp_file, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
                count += 1
        os.replace(temp_file, path)
    except Exception as e:
        logger.error(f"[IO] Ошибка сохранения {path}: {e}")
        if os.path.exists(temp_file):
            os.remove(temp_file)
        raise
    logger.info(f"[IO] Сохранено: {path} ({count} строк)")
    return count


def load_csv(path: str) -> List[dict]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value
