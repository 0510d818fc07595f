from __future__ import annotations

from typing import Optional

import numpy as np

from scpo.control.rollout import rollout_batch
from scpo.control.system import LinearSystem
from scpo.control.target import TargetSet
from scpo.types import Array, Policy

DEFAULT_REACHABLE_HORIZON = 2000
DEFAULT_GRID_RESOLUTION = 50


def state_grid(system: LinearSystem, resolution: int = DEFAULT_GRID_RESOLUTION) -> Array:
    """Uniform grid over the state box, endpoints included; rows in C order of the axes."""
    if resolution < 2:
        raise ValueError(f"grid resolution must be >= 2, got {resolution}")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(system.state_lo, system.state_hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def estimate_reachable_set(
    system: LinearSystem,
    policy: Policy,
    grid: Array,
    horizon: int = DEFAULT_REACHABLE_HORIZON,
    target: Optional[TargetSet] = None,
) -> Array:
    """
    True where the closed loop from that grid state enters the target within
    `horizon` steps without leaving the state box.
    """
    target = TargetSet.ball() if target is None else target
    run = rollout_batch(system, policy, grid, horizon, target)
    return run.succeeded
