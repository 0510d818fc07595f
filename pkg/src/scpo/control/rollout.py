from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from scpo.control.system import LinearSystem, StageCost
from scpo.control.target import TargetSet
from scpo.types import Array, Policy


@dataclass(frozen=True)
class Trajectory:
    """
    One closed-loop run. `states` has one more row than `inputs`; the run stops
    early on target entry or when a state leaves the state box.
    """

    states: Array
    inputs: Array
    stage_costs: Array
    cost: float
    feasible: bool
    reached_target: bool
    steps_to_target: Optional[int]

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def cumulative_costs(self) -> Array:
        """Cost accumulated before each state, starting at 0."""
        return np.concatenate([[0.0], np.cumsum(self.stage_costs)])


@dataclass(frozen=True)
class BatchRollout:
    final_states: Array
    # stage costs plus any terminal cost, accumulated from the last step backwards
    costs: Array
    feasible: Array
    reached: Array
    # target-entry step, -1 where the target was not reached
    steps: Array
    visited_states: Optional[Array] = None
    visited_rows: Optional[Array] = None

    @property
    def succeeded(self) -> Array:
        return self.feasible & self.reached


def rollout_batch(
    system: LinearSystem,
    policy: Policy,
    X0: Array,
    max_steps: int,
    target: TargetSet,
    cost: Optional[StageCost] = None,
    *,
    terminal_cost: Optional[Callable[[Array], Array]] = None,
    record_states: bool = False,
) -> BatchRollout:
    """
    Run every row of X0 in closed loop for at most `max_steps` inputs.

    Inputs are clipped to the input box before they are applied. A row stops as
    soon as it is in the target set (reached) or outside the state box
    (infeasible). Rows still running after `max_steps` are feasible but
    unreached.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    X = np.array(X0, dtype=np.float64, ndmin=2)
    N = X.shape[0]
    feasible = np.ones(N, dtype=bool)
    reached = np.zeros(N, dtype=bool)
    steps = np.full(N, -1, dtype=np.int64)
    active = np.ones(N, dtype=bool)
    stage: List[Array] = []
    visited: List[Array] = []
    visited_rows: List[Array] = []

    for k in range(max_steps + 1):
        outside = active & ~system.in_state_box(X)
        feasible[outside] = False
        active &= ~outside
        hit = active & target.contains(X)
        reached[hit] = True
        steps[hit] = k
        active &= ~hit
        if k == max_steps or not active.any():
            break

        idx = np.flatnonzero(active)
        Xa = X[idx]
        U = system.clip_input(np.asarray(policy(Xa), dtype=np.float64).reshape(idx.size, -1))
        if cost is not None:
            c = np.zeros(N)
            c[idx] = cost(Xa, U)
            stage.append(c)
        if record_states:
            visited.append(Xa.copy())
            visited_rows.append(idx)
        X[idx] = system.step(Xa, U)

    if terminal_cost is None:
        total = np.zeros(N)
    else:
        total = np.asarray(terminal_cost(X), dtype=np.float64)
    for c in reversed(stage):
        total = c + total

    return BatchRollout(
        final_states=X,
        costs=total,
        feasible=feasible,
        reached=reached,
        steps=steps,
        visited_states=np.concatenate(visited) if visited else np.zeros((0, X.shape[1])),
        visited_rows=np.concatenate(visited_rows) if visited_rows else np.zeros(0, np.int64),
    )


def rollout(
    system: LinearSystem,
    policy: Policy,
    x0: Array,
    max_steps: int,
    target: TargetSet,
    cost: Optional[StageCost] = None,
) -> Trajectory:
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    x = np.asarray(x0, dtype=np.float64).reshape(1, -1)
    states = [x[0].copy()]
    inputs: List[Array] = []
    costs: List[float] = []
    feasible, reached, steps_to_target = True, False, None

    for k in range(max_steps + 1):
        if not system.in_state_box(x)[0]:
            feasible = False
            break
        if target.contains(x)[0]:
            reached, steps_to_target = True, k
            break
        if k == max_steps:
            break
        u = system.clip_input(np.asarray(policy(x), dtype=np.float64).reshape(1, -1))
        if cost is not None:
            costs.append(float(cost(x, u)[0]))
        inputs.append(u[0].copy())
        x = system.step(x, u)
        states.append(x[0].copy())

    stage_costs = np.asarray(costs) if cost is not None else np.zeros(len(inputs))
    return Trajectory(
        states=np.asarray(states),
        inputs=np.asarray(inputs).reshape(len(inputs), system.n_u),
        stage_costs=stage_costs,
        cost=float(np.sum(stage_costs)),
        feasible=feasible,
        reached_target=reached,
        steps_to_target=steps_to_target,
    )
