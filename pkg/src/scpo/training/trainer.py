from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from scpo.config import ExperimentConfig, TrainerConfig, TrainMode
from scpo.errors import ConfigError, InfeasibleStartError, MetricError
from scpo.logger import get_logger
from scpo.metrics.base import PenaltyMetric, evaluate_metric
from scpo.metrics.grid_bound import violation_summary
from scpo.net.checkpoint import save_checkpoint
from scpo.net.policy import PolicyNet
from scpo.projection.adaptive import adaptive_project_and_verify, is_safe
from scpo.projection.audit import ProjectionAudit
from scpo.projection.bank import UpdateBank
from scpo.projection.linesearch import armijo_search
from scpo.projection.smoothness import SmoothnessVector, estimate_initial_L
from scpo.projection.solver import ProjectionStatus, SolverOptions
from scpo.training.log import EpochRecord, TrainLog
from scpo.training.state import TrainState
from scpo.training.tasks import Task, build_task
from scpo.types import Array, Batch, ParamVector

logger = get_logger(__name__)

ABORTED = "aborted"
SOFT_PENALTY = "soft-penalty"


@dataclass
class TrainResult:
    params: ParamVector
    log: TrainLog
    state: TrainState
    checkpoints: List[Path] = field(default_factory=list)


def batch_sampler(
    task: Task, rng: np.random.Generator, params: Optional[ParamVector] = None
) -> Batch:
    return task.sample_batch(rng, task.initial_params() if params is None else params)


class ScpoTrainer:
    """
    Projected training loop. Every accepted iterate keeps the task's safety metric
    at or below `safety_tol`; a step that cannot be verified is replaced by the
    zero step. `mode=soft-penalty` runs the unconstrained penalty baseline instead.
    """

    def __init__(
        self,
        task: Task,
        *,
        learning_rate: float,
        config: TrainerConfig = TrainerConfig(),
        mode: TrainMode = TrainMode.SCPO,
        solver_options: SolverOptions = SolverOptions(),
        audit: Optional[ProjectionAudit] = None,
        seeds: Optional[Dict[str, int]] = None,
        config_echo: Optional[Dict[str, Any]] = None,
    ) -> None:
        if learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {learning_rate}")
        if mode is TrainMode.SOFT_PENALTY and not isinstance(task.metric, PenaltyMetric):
            raise ConfigError(
                f"{type(task.metric).__name__} has no penalty gradient; "
                "soft-penalty mode is unavailable for this task"
            )
        self.task = task
        self.metric = task.metric
        self.learning_rate = learning_rate
        self.config = config
        self.mode = mode
        self.solver_options = solver_options
        self.audit = audit
        self.seeds = dict(seeds or {"rng_seed": config.rng_seed})
        self.config_echo = config_echo

    @classmethod
    def from_config(
        cls,
        config: ExperimentConfig,
        task: Optional[Task] = None,
        *,
        audit: Optional[ProjectionAudit] = None,
    ) -> ScpoTrainer:
        return cls(
            task if task is not None else build_task(config),
            learning_rate=config.learning_rate,
            config=config.trainer,
            mode=config.mode,
            audit=audit,
            seeds=config.seeds,
            config_echo=config.model_dump(mode="json"),
        )

    # -----------------------
    # State
    # -----------------------

    def initial_state(self, params: Optional[ParamVector] = None) -> TrainState:
        params = self.task.initial_params() if params is None else np.asarray(params, float)
        g = evaluate_metric(self.metric, params)
        if self.mode is TrainMode.SCPO and not is_safe(g, self.config.safety_tol):
            raise InfeasibleStartError(
                f"initial parameters violate the safety metric (max g = {float(np.max(g)):.3e}); "
                "training needs a safe starting point"
            )
        return TrainState(
            params=params,
            g_value=g,
            bank=UpdateBank.seeded(self.config.bank_capacity, params.shape[0], g),
            smoothness=SmoothnessVector(
                np.zeros(g.shape[0]), self.config.growth_factor, self.config.max_doublings
            ),
        )

    def _record(
        self,
        state: TrainState,
        *,
        params: ParamVector,
        g_value: Array,
        loss: float,
        loss_after: float,
        alpha: float,
        status: str,
        grad: Optional[ParamVector],
        step: Optional[ParamVector],
        doublings: int,
        smoothness: Tuple[float, ...],
        started: float,
    ) -> EpochRecord:
        summary = violation_summary(g_value)
        if step is None:
            step_sq, descent = 0.0, 0.0
        else:
            step_sq = float(step @ step)
            descent = float(-(grad @ step))
        return EpochRecord(
            epoch=state.epoch,
            loss=loss,
            loss_after=loss_after,
            eval_loss=self.task.eval_loss(params),
            g_l1=summary.raw,
            g_positive=summary.positive,
            g_max=float(np.max(g_value)),
            alpha=alpha,
            status=status,
            step_norm=float(np.sqrt(step_sq)),
            step_norm_sq=step_sq,
            descent=descent,
            doublings=doublings,
            smoothness=smoothness,
            wall_clock=time.perf_counter() - started,
        )

    # -----------------------
    # Steps
    # -----------------------

    def scpo_step(self, state: TrainState, batch: Batch) -> Tuple[TrainState, EpochRecord]:
        """
        One projected update: raw gradient step, bank update, verified
        projection, Armijo line search on the frozen batch, recentering.
        """
        started = time.perf_counter()
        cfg = self.config
        theta = state.params
        loss0, grad = self.task.loss_and_grad(theta, batch)
        raw = -self.learning_rate * grad

        try:
            g_half = evaluate_metric(self.metric, theta + raw)
            bank = state.bank.copy()
            bank.append(raw, g_half)
            L = estimate_initial_L(
                bank,
                state.g_value,
                growth_factor=cfg.growth_factor,
                max_doublings=cfg.max_doublings,
            )
            if self.audit is not None:
                self.audit.epoch = state.epoch
            verified = adaptive_project_and_verify(
                bank,
                state.g_value,
                L,
                self.metric,
                theta,
                safety_tol=cfg.safety_tol,
                options=self.solver_options,
                audit=self.audit,
            )
        except MetricError as e:
            logger.warning("epoch %d aborted, parameters unchanged: %s", state.epoch, e)
            record = self._record(
                state,
                params=theta,
                g_value=state.g_value,
                loss=loss0,
                loss_after=loss0,
                alpha=0.0,
                status=ABORTED,
                grad=grad,
                step=None,
                doublings=0,
                smoothness=tuple(state.smoothness.L),
                started=started,
            )
            return state.advance(), record

        result = verified.result
        delta = result.delta_star
        status = result.status.value
        alpha, loss_after, g_new = 0.0, loss0, state.g_value

        if not result.is_zero:
            alpha, loss_after = armijo_search(
                lambda p: self.task.loss(p, batch),
                theta,
                delta,
                cfg.armijo_sigma,
                cfg.armijo_shrink,
                cfg.max_backtracks,
                initial_loss=loss0,
            )
            if alpha == 1.0:
                g_new = verified.g_value
            elif alpha > 0.0:
                try:
                    g_new = evaluate_metric(self.metric, theta + alpha * delta)
                except MetricError as e:
                    logger.warning("epoch %d: re-verification failed: %s", state.epoch, e)
                    g_new = None
                if g_new is None or not is_safe(g_new, cfg.safety_tol):
                    logger.warning(
                        "epoch %d: shortened step (alpha=%.3g) violates the metric, rolling back",
                        state.epoch,
                        alpha,
                    )
                    alpha, loss_after, g_new = 0.0, loss0, state.g_value
                    status = ProjectionStatus.ZERO_STEP.value
            else:
                logger.warning("epoch %d: Armijo rejected every step length", state.epoch)
                status = ProjectionStatus.ZERO_STEP.value

        if result.is_zero and result.status is not ProjectionStatus.RAW_STEP_FEASIBLE:
            logger.warning("epoch %d: zero step (%s)", state.epoch, status)

        applied = alpha * delta
        new_params = theta + applied
        new_state = state.advance(
            params=new_params,
            g_value=g_new,
            bank=bank.recenter(applied, g_new),
            smoothness=verified.smoothness,
        )
        record = self._record(
            state,
            params=new_params,
            g_value=g_new,
            loss=loss0,
            loss_after=loss_after,
            alpha=alpha,
            status=status,
            grad=grad,
            step=delta,
            doublings=verified.doublings,
            smoothness=tuple(float(v) for v in verified.smoothness.L),
            started=started,
        )
        return new_state, record

    def soft_penalty_step(
        self, state: TrainState, batch: Batch, weight: Optional[float] = None
    ) -> Tuple[TrainState, EpochRecord]:
        """Plain gradient step on loss + weight * sum(max(g, 0)); no safety guarantee."""
        started = time.perf_counter()
        weight = self.config.penalty_weight if weight is None else weight
        if not isinstance(self.metric, PenaltyMetric):
            raise ConfigError(f"{type(self.metric).__name__} has no penalty gradient")
        theta = state.params
        loss0, grad = self.task.loss_and_grad(theta, batch)
        _, penalty_grad = self.metric.penalty_gradient(theta, weight)
        step = -self.learning_rate * (grad + penalty_grad)
        new_params = theta + step
        try:
            g_new = evaluate_metric(self.metric, new_params)
        except MetricError as e:
            logger.warning("epoch %d aborted, parameters unchanged: %s", state.epoch, e)
            record = self._record(
                state,
                params=theta,
                g_value=state.g_value,
                loss=loss0,
                loss_after=loss0,
                alpha=0.0,
                status=ABORTED,
                grad=grad,
                step=None,
                doublings=0,
                smoothness=(),
                started=started,
            )
            return state.advance(), record

        record = self._record(
            state,
            params=new_params,
            g_value=g_new,
            loss=loss0,
            loss_after=self.task.loss(new_params, batch),
            alpha=1.0,
            status=SOFT_PENALTY,
            grad=grad,
            step=step,
            doublings=0,
            smoothness=(),
            started=started,
        )
        return state.advance(params=new_params, g_value=g_new), record

    # -----------------------
    # Loop
    # -----------------------

    def train(
        self,
        epochs: Optional[int] = None,
        *,
        checkpoint_dir: Union[str, Path, None] = None,
    ) -> TrainResult:
        epochs = self.config.epochs if epochs is None else epochs
        rng = np.random.default_rng(self.config.rng_seed)
        state = self.initial_state()
        log = TrainLog(seeds=self.seeds)
        checkpoints: List[Path] = []

        for _ in range(epochs):
            batch = batch_sampler(self.task, rng, state.params)
            if self.mode is TrainMode.SOFT_PENALTY:
                state, record = self.soft_penalty_step(state, batch)
            else:
                state, record = self.scpo_step(state, batch)
            log.append(record)
            logger.info(
                "epoch %d: loss=%.6g eval_loss=%.6g max_g=%.3e alpha=%.3g status=%s",
                record.epoch,
                record.loss_after,
                record.eval_loss,
                record.g_max,
                record.alpha,
                record.status,
            )
            if checkpoint_dir is not None:
                checkpoints.append(
                    save_checkpoint(
                        Path(checkpoint_dir) / f"epoch_{record.epoch:04d}.ckpt",
                        PolicyNet(self.task.spec, state.params),
                        config=self.config_echo,
                        metadata={
                            "epoch": record.epoch,
                            "eval_loss": record.eval_loss,
                            "g_max": record.g_max,
                        },
                    )
                )

        return TrainResult(params=state.params, log=log, state=state, checkpoints=checkpoints)


def train(
    config: ExperimentConfig,
    *,
    checkpoint_dir: Union[str, Path, None] = None,
    audit: Optional[ProjectionAudit] = None,
) -> TrainResult:
    return ScpoTrainer.from_config(config, audit=audit).train(checkpoint_dir=checkpoint_dir)
