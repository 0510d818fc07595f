from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol, Tuple, Union

import numpy as np

from scpo.config import ExperimentConfig, TaskKind
from scpo.control.expert import MaliciousExpert
from scpo.control.lqr import BackupController
from scpo.control.metric import ControlSafetyMetric
from scpo.control.policy import ResidualPolicy
from scpo.control.rollout import rollout_batch
from scpo.control.system import LinearSystem, StageCost, double_integrator
from scpo.control.target import TargetKind, TargetSet
from scpo.control.value import value_backup
from scpo.errors import SamplingError
from scpo.logger import get_logger
from scpo.metrics.base import SafetyMetric
from scpo.metrics.grid_bound import GridBoundMetric
from scpo.net.policy import PolicyNet
from scpo.net.spec import NetSpec
from scpo.types import Array, Batch, ParamVector

logger = get_logger(__name__)


class Task(Protocol):
    """What the trainer needs from an experiment."""

    spec: NetSpec

    @property
    def metric(self) -> SafetyMetric: ...

    def initial_params(self) -> ParamVector: ...

    def sample_batch(self, rng: np.random.Generator, params: ParamVector) -> Batch: ...

    def loss(self, params: ParamVector, batch: Batch) -> float: ...

    def loss_and_grad(self, params: ParamVector, batch: Batch) -> Tuple[float, ParamVector]: ...

    def eval_loss(self, params: ParamVector) -> float: ...


def target_function(x: Array) -> Array:
    return np.sin(x) + np.sin(3.0 * x) + np.sin(7.0 * x)


@dataclass(frozen=True)
class RegressionTask:
    """
    Fit f(x) = sin x + sin 3x + sin 7x from standard-normal samples while keeping
    |pi_theta| below the bound on a fixed grid. The safe policy is zero, so the
    policy is the residual net itself.
    """

    spec: NetSpec
    grid_metric: GridBoundMetric
    batch_size: int = 64
    eval_inputs: Array = field(
        default_factory=lambda: np.random.default_rng(12345).standard_normal((256, 1))
    )

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> RegressionTask:
        reg = config.regression
        spec = config.net.to_spec(1, 1)
        return cls(
            spec=spec,
            grid_metric=GridBoundMetric.uniform(
                spec, reg.grid_size, reg.grid_lo, reg.grid_hi, reg.bound
            ),
            batch_size=config.trainer.batch_size,
            eval_inputs=np.random.default_rng(reg.eval_seed).standard_normal((reg.eval_size, 1)),
        )

    @property
    def metric(self) -> GridBoundMetric:
        return self.grid_metric

    def initial_params(self) -> ParamVector:
        return PolicyNet.zero_residual(self.spec).get_params()

    def sample_batch(
        self, rng: np.random.Generator, params: Optional[ParamVector] = None
    ) -> Batch:
        x = rng.standard_normal((self.batch_size, 1))
        return Batch(inputs=x, targets=target_function(x))

    def loss_and_grad(self, params: ParamVector, batch: Batch) -> Tuple[float, ParamVector]:
        return PolicyNet(self.spec, params).loss_and_grad(batch)

    def loss(self, params: ParamVector, batch: Batch) -> float:
        y = PolicyNet(self.spec, params).forward_batch(batch.inputs)
        return float(np.sum((y - batch.targets) ** 2) / len(batch))

    def eval_loss(self, params: ParamVector) -> float:
        x = self.eval_inputs
        return self.loss(params, Batch(inputs=x, targets=target_function(x)))


@dataclass(frozen=True)
class DoubleIntegratorTask:
    """
    Imitate a malicious expert on states visited by the current policy, with the
    one-step improvement metric as the safety constraint.
    """

    spec: NetSpec
    system: LinearSystem
    cost: StageCost
    backup: BackupController
    target: TargetSet
    expert: MaliciousExpert
    control_metric: ControlSafetyMetric
    rollouts_per_epoch: int = 32
    rollout_steps: int = 200
    max_resample: int = 10
    value_horizon: int = 3000

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> DoubleIntegratorTask:
        ctl = config.control
        system = double_integrator(ctl.dt, ctl.state_bound, ctl.input_bound)
        cost = StageCost.identity(system.n_x, system.n_u, ctl.state_weight, ctl.input_weight)
        backup = BackupController.lqr(system, cost)
        if ctl.target_kind is TargetKind.LEVEL_SET:
            target = TargetSet.level_set(backup.P, ctl.target_radius)
        else:
            target = TargetSet.ball(ctl.target_radius)
        spec = config.net.to_spec(system.n_x, system.n_u)
        metric = ControlSafetyMetric.uniform(
            system,
            backup,
            cost,
            target,
            spec,
            ctl.grid_resolution,
            horizon=ctl.value_horizon,
            decrease_slack=ctl.decrease_slack,
        )
        return cls(
            spec=spec,
            system=system,
            cost=cost,
            backup=backup,
            target=target,
            expert=MaliciousExpert(
                ctl.expert_gain, ctl.expert_noise_std, -ctl.input_bound, ctl.input_bound
            ),
            control_metric=metric,
            rollouts_per_epoch=ctl.rollouts_per_epoch,
            rollout_steps=ctl.rollout_steps,
            max_resample=ctl.max_resample,
            value_horizon=ctl.value_horizon,
        )

    @property
    def metric(self) -> ControlSafetyMetric:
        return self.control_metric

    def initial_params(self) -> ParamVector:
        return PolicyNet.zero_residual(self.spec).get_params()

    def policy(self, params: ParamVector) -> ResidualPolicy:
        return ResidualPolicy(self.backup, PolicyNet(self.spec, params), self.target)

    def sample_states(self, rng: np.random.Generator, params: ParamVector) -> Array:
        """
        States visited by on-policy rollouts from uniform initial states, keeping
        only trajectories whose endpoint the backup controller can still recover.
        """
        policy = self.policy(params)
        for attempt in range(self.max_resample + 1):
            X0 = rng.uniform(
                self.system.state_lo,
                self.system.state_hi,
                size=(self.rollouts_per_epoch, self.system.n_x),
            )
            run = rollout_batch(
                self.system, policy, X0, self.rollout_steps, self.target, record_states=True
            )
            recoverable = np.zeros(X0.shape[0], dtype=bool)
            feasible = np.flatnonzero(run.feasible)
            if feasible.size:
                values = value_backup(
                    self.system,
                    self.backup,
                    self.cost,
                    run.final_states[feasible],
                    self.target,
                    self.value_horizon,
                )
                recoverable[feasible] = np.isfinite(values)
            keep = recoverable[run.visited_rows]
            if keep.any():
                return run.visited_states[keep]
            logger.debug("no recoverable trajectory in attempt %d, resampling", attempt)
        raise SamplingError(
            f"no recoverable trajectory after {self.max_resample + 1} sampling attempts"
        )

    def sample_batch(self, rng: np.random.Generator, params: ParamVector) -> Batch:
        states = self.sample_states(rng, params)
        return Batch(inputs=states, targets=self.expert.labels(states, rng))

    def _imitation(self, params: ParamVector, batch: Batch, with_grad: bool):
        policy = self.policy(params)
        X = batch.inputs
        residual = policy(X) - batch.targets
        n = residual.shape[0]
        loss = float(np.sum(residual**2) / n)
        if not with_grad:
            return loss, None
        upstream = 2.0 * residual / n * policy.residual_jacobian_mask(X)
        return loss, policy.net.vjp(X, upstream)

    def loss_and_grad(self, params: ParamVector, batch: Batch) -> Tuple[float, ParamVector]:
        return self._imitation(params, batch, with_grad=True)

    def loss(self, params: ParamVector, batch: Batch) -> float:
        return self._imitation(params, batch, with_grad=False)[0]

    def eval_loss(self, params: ParamVector) -> float:
        X = self.control_metric.grid
        return self.loss(params, Batch(inputs=X, targets=self.expert.noise_free(X)))


def build_task(config: ExperimentConfig) -> Union[RegressionTask, DoubleIntegratorTask]:
    if config.task is TaskKind.REGRESSION:
        return RegressionTask.from_config(config)
    return DoubleIntegratorTask.from_config(config)
