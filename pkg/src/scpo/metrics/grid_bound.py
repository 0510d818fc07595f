from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from scpo.net.policy import PolicyNet
from scpo.net.spec import NetSpec
from scpo.types import Array, ParamVector, Policy

DEFAULT_GRID_SIZE = 64
DEFAULT_GRID_RANGE = (-3.0, 3.0)
DEFAULT_BOUND = 1.4


@dataclass(frozen=True)
class ViolationSummary:
    # |g|_1 / k, the figure metric; nonzero even for a strictly safe policy
    raw: float
    # |max(g, 0)|_1 / k, zero exactly when every constraint holds
    positive: float


def uniform_grid(
    size: int = DEFAULT_GRID_SIZE,
    lo: float = DEFAULT_GRID_RANGE[0],
    hi: float = DEFAULT_GRID_RANGE[1],
) -> Array:
    """`size` points over [lo, hi], endpoints included, as a (size, 1) column."""
    if size < 2:
        raise ValueError(f"grid size must be >= 2, got {size}")
    if not lo < hi:
        raise ValueError(f"grid range must satisfy lo < hi, got ({lo}, {hi})")
    return np.linspace(lo, hi, size).reshape(-1, 1)


def bound_values(outputs: Array, bound: float) -> Array:
    return np.abs(np.asarray(outputs, dtype=np.float64)).reshape(-1) - bound


def eval_policy_bound(policy: Policy, grid: Array, bound: float = DEFAULT_BOUND) -> Array:
    """g_j = |policy(v_j)| - bound for an arbitrary batched policy."""
    return bound_values(policy(np.asarray(grid, dtype=np.float64)), bound)


def violation_summary(g: Array) -> ViolationSummary:
    g = np.asarray(g, dtype=np.float64).reshape(-1)
    if g.size == 0:
        return ViolationSummary(raw=0.0, positive=0.0)
    k = g.shape[0]
    return ViolationSummary(
        raw=float(np.sum(np.abs(g)) / k),
        positive=float(np.sum(np.maximum(g, 0.0)) / k),
    )


@dataclass(frozen=True)
class GridBoundMetric:
    """
    Output-magnitude bound on a 1-D grid: g_j(theta) = |pi_theta(v_j)| - bound.

    The safe policy of the regression task is the zero function, so pi_theta is
    the residual net itself.
    """

    spec: NetSpec
    grid: Array
    bound: float = DEFAULT_BOUND

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim == 1:
            grid = grid.reshape(-1, 1)
        if grid.shape[1] != self.spec.input_dim:
            raise ValueError(
                f"grid has {grid.shape[1]} columns, net expects {self.spec.input_dim} inputs"
            )
        if self.bound < 0.0:
            raise ValueError(f"bound must be >= 0, got {self.bound}")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def uniform(
        cls,
        spec: NetSpec,
        size: int = DEFAULT_GRID_SIZE,
        lo: float = DEFAULT_GRID_RANGE[0],
        hi: float = DEFAULT_GRID_RANGE[1],
        bound: float = DEFAULT_BOUND,
    ) -> GridBoundMetric:
        return cls(spec=spec, grid=uniform_grid(size, lo, hi), bound=bound)

    @property
    def k(self) -> int:
        return int(self.grid.shape[0] * self.spec.output_dim)

    def policy(self, params: ParamVector) -> PolicyNet:
        return PolicyNet(self.spec, params)

    def evaluate(self, params: ParamVector) -> Array:
        return bound_values(self.policy(params).forward_batch(self.grid), self.bound)

    def penalty_gradient(self, params: ParamVector, weight: float) -> Tuple[float, ParamVector]:
        """
        weight * sum_j max(g_j, 0) and a subgradient in theta. At |pi| = 0 the sign
        is taken as 0 and at g_j = 0 the positive part contributes nothing.
        """
        net = self.policy(params)
        y = net.forward_batch(self.grid)
        g = np.abs(y) - self.bound
        active = g > 0.0
        value = float(weight * np.sum(np.where(active, g, 0.0)))
        upstream = weight * np.sign(y) * active
        return value, net.vjp(self.grid, upstream)


def eval_grid_bound(metric: GridBoundMetric, params: ParamVector) -> Array:
    return metric.evaluate(params)
