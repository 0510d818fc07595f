from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from scpo.control.rollout import Trajectory
from scpo.types import Array

REGRESSION_CURVE_COLUMNS = ("x", "policy", "target", "bound")
TRAJECTORY_COLUMNS = ("policy", "k", "x1", "x2", "u", "cost")
MASK_COLUMNS = ("x1", "x2", "reachable")


def _write_rows(path: Union[str, Path], columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path


def write_regression_curve(
    path: Union[str, Path], grid: Array, policy: Array, target: Array, bound: float
) -> Path:
    rows = zip(
        np.asarray(grid, dtype=float).reshape(-1).tolist(),
        np.asarray(policy, dtype=float).reshape(-1).tolist(),
        np.asarray(target, dtype=float).reshape(-1).tolist(),
        [float(bound)] * len(grid),
    )
    return _write_rows(path, REGRESSION_CURVE_COLUMNS, rows)


def trajectory_rows(label: str, trajectory: Trajectory) -> List[list]:
    """
    One row per visited state; `cost` is the cost accumulated up to that state and
    `u` is empty on the final state, which receives no input.
    """
    cumulative = trajectory.cumulative_costs()
    rows = []
    for k, x in enumerate(trajectory.states):
        u = float(trajectory.inputs[k, 0]) if k < len(trajectory) else ""
        rows.append([label, k, float(x[0]), float(x[1]), u, float(cumulative[k])])
    return rows


def write_trajectories(path: Union[str, Path], trajectories: Dict[str, Trajectory]) -> Path:
    rows: List[list] = []
    for label, trajectory in trajectories.items():
        rows.extend(trajectory_rows(label, trajectory))
    return _write_rows(path, TRAJECTORY_COLUMNS, rows)


def write_mask(path: Union[str, Path], grid: Array, mask: Array) -> Path:
    rows = ((float(x[0]), float(x[1]), int(flag)) for x, flag in zip(grid, mask))
    return _write_rows(path, MASK_COLUMNS, rows)
