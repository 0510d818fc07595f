from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from scpo.control.lqr import BackupController
from scpo.control.rollout import rollout_batch
from scpo.control.system import LinearSystem, StageCost
from scpo.control.target import TargetSet
from scpo.types import Array

# 300 s at dt = 0.1
DEFAULT_VALUE_HORIZON = 3000


def value_backup(
    system: LinearSystem,
    backup: BackupController,
    cost: StageCost,
    X: Array,
    target: TargetSet,
    horizon: int = DEFAULT_VALUE_HORIZON,
) -> Array:
    """
    Truncated cost-to-go of the backup controller: accumulated stage cost until
    target entry plus the terminal x^T P x. +inf for rows that leave the state box
    or do not reach the target within `horizon` steps.
    """
    X = np.array(X, dtype=np.float64, ndmin=2)
    run = rollout_batch(system, backup, X, horizon, target, cost, terminal_cost=backup.lqr_value)
    return np.where(run.succeeded, run.costs, np.inf)


def q_and_advantage(
    system: LinearSystem,
    backup: BackupController,
    cost: StageCost,
    X: Array,
    U: Array,
    target: TargetSet,
    horizon: int = DEFAULT_VALUE_HORIZON,
    *,
    values: Optional[Array] = None,
) -> Tuple[Array, Array]:
    """
    Q(x, u) = c(x, u) + V(Ax + Bu) and A(x, u) = Q(x, u) - V(x) under the backup
    controller. `values` may carry precomputed V(x). An unrecoverable successor
    gives Q = A = +inf; an unrecoverable x gives A = +inf.
    """
    X = np.array(X, dtype=np.float64, ndmin=2)
    U = system.clip_input(np.array(U, dtype=np.float64).reshape(X.shape[0], -1))
    if values is None:
        values = value_backup(system, backup, cost, X, target, horizon)
    successors = system.step(X, U)
    q = cost(X, U) + value_backup(system, backup, cost, successors, target, horizon)
    q = np.where(system.in_state_box(X), q, np.inf)
    with np.errstate(invalid="ignore"):
        adv = np.where(np.isinf(q) | np.isinf(values), np.inf, q - values)
    return q, adv
