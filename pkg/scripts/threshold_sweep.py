# scripts/threshold_sweep.py
"""
Доля занятых вокселей в зависимости от порога шума Перлина при фиксированном зерне.

Использование:
    python scripts/threshold_sweep.py --seed 1 --dims 100,100,10 --resolution 0.5
"""
import argparse
import logging
import os
import sys
from typing import List, Sequence, Tuple

import numpy as np

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import LOG_FORMAT
from environment import generate_perlin

logger = logging.getLogger(__name__)


def sweep(seed: int, dims: Sequence[int], resolution: float,
          thresholds: Sequence[float]) -> List[Tuple[float, float]]:
    """
    Returns:
        список (порог, доля занятых) по возрастанию порога
    """
    report = []
    for t in sorted(thresholds):
        grid = generate_perlin(seed, dims, resolution, float(t))
        report.append((float(t), grid.occupied_fraction()))
    return report


def main():
    parser = argparse.ArgumentParser(description="Перебор порога шума Перлина")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dims", default="100,100,10")
    parser.add_argument("--resolution", type=float, default=0.5)
    parser.add_argument("--start", type=float, default=-0.5)
    parser.add_argument("--stop", type=float, default=0.5)
    parser.add_argument("--steps", type=int, default=11)
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format=LOG_FORMAT)
    dims = [int(v) for v in args.dims.split(",")]
    for threshold, fraction in sweep(args.seed, dims, args.resolution,
                                     np.linspace(args.start, args.stop, args.steps)):
        print(f"  порог {threshold:+.3f}  занятость {fraction:.4f}")


if __name__ == "__main__":
    main()
