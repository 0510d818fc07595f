from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scpo.control.lqr import BackupController
from scpo.control.policy import ResidualPolicy
from scpo.control.reachable import DEFAULT_GRID_RESOLUTION, state_grid
from scpo.control.system import LinearSystem, StageCost
from scpo.control.target import TargetSet
from scpo.control.value import DEFAULT_VALUE_HORIZON, q_and_advantage, value_backup
from scpo.errors import MetricError
from scpo.logger import get_logger
from scpo.net.policy import PolicyNet
from scpo.net.spec import NetSpec
from scpo.types import Array, ParamVector

logger = get_logger(__name__)


@dataclass(frozen=True)
class ControlSafetyMetric:
    """
    One-step improvement over the backup controller, checked on a state grid:

        g(theta) = max_x [ A(x, pi_theta(x)) - (1 - slack) |x|^2 ]

    The grid keeps only states the backup controller brings to the target
    (finite value) and drops states already in the target.
    """

    system: LinearSystem
    backup: BackupController
    cost: StageCost
    target: TargetSet
    spec: NetSpec
    grid: Array
    grid_values: Array
    horizon: int = DEFAULT_VALUE_HORIZON
    decrease_slack: float = 0.0

    def __post_init__(self) -> None:
        if self.grid.shape[0] == 0:
            raise MetricError("control safety grid is empty after filtering")
        if not 0.0 <= self.decrease_slack < 1.0:
            raise ValueError(f"decrease_slack must lie in [0, 1), got {self.decrease_slack}")

    @classmethod
    def on_grid(
        cls,
        system: LinearSystem,
        backup: BackupController,
        cost: StageCost,
        target: TargetSet,
        spec: NetSpec,
        grid: Array,
        *,
        horizon: int = DEFAULT_VALUE_HORIZON,
        decrease_slack: float = 0.0,
    ) -> ControlSafetyMetric:
        grid = np.array(grid, dtype=np.float64, ndmin=2)
        values = value_backup(system, backup, cost, grid, target, horizon)
        keep = np.isfinite(values) & ~target.contains(grid)
        logger.debug("control safety grid: kept %d of %d states", int(keep.sum()), grid.shape[0])
        return cls(
            system=system,
            backup=backup,
            cost=cost,
            target=target,
            spec=spec,
            grid=grid[keep],
            grid_values=values[keep],
            horizon=horizon,
            decrease_slack=decrease_slack,
        )

    @classmethod
    def uniform(
        cls,
        system: LinearSystem,
        backup: BackupController,
        cost: StageCost,
        target: TargetSet,
        spec: NetSpec,
        resolution: int = DEFAULT_GRID_RESOLUTION,
        **kwargs,
    ) -> ControlSafetyMetric:
        return cls.on_grid(
            system, backup, cost, target, spec, state_grid(system, resolution), **kwargs
        )

    @property
    def k(self) -> int:
        return 1

    def policy(self, params: ParamVector) -> ResidualPolicy:
        return ResidualPolicy(self.backup, PolicyNet(self.spec, params), self.target)

    def decrease_margin(self, X: Array) -> Array:
        return (1.0 - self.decrease_slack) * np.sum(X**2, axis=1)

    def advantages(self, params: ParamVector) -> Array:
        U = self.policy(params)(self.grid)
        _, adv = q_and_advantage(
            self.system,
            self.backup,
            self.cost,
            self.grid,
            U,
            self.target,
            self.horizon,
            values=self.grid_values,
        )
        return adv

    def evaluate(self, params: ParamVector) -> Array:
        margin = self.advantages(params) - self.decrease_margin(self.grid)
        return np.array([float(np.max(margin))])


def control_safety_metric(metric: ControlSafetyMetric, params: ParamVector) -> float:
    return float(metric.evaluate(params)[0])
