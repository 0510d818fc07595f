from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from scpo.control.target import TargetKind
from scpo.errors import ConfigError
from scpo.net.spec import Activation, NetSpec


class TaskKind(str, Enum):
    REGRESSION = "regression"
    DOUBLE_INTEGRATOR = "double-integrator"


class TrainMode(str, Enum):
    SCPO = "scpo"
    SOFT_PENALTY = "soft-penalty"


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NetConfig(_Config):
    hidden_width: int = Field(64, gt=0)
    num_blocks: int = Field(7, gt=0)
    activation: Activation = Activation.TANH
    skip_connections: bool = False
    rng_seed: int = Field(0, ge=0)

    def to_spec(self, input_dim: int, output_dim: int) -> NetSpec:
        return NetSpec(
            input_dim=input_dim,
            output_dim=output_dim,
            hidden_width=self.hidden_width,
            num_blocks=self.num_blocks,
            activation=self.activation,
            skip_connections=self.skip_connections,
            rng_seed=self.rng_seed,
        )


class TrainerConfig(_Config):
    # None picks the task default: 1e-2 for regression, 1e-3 for control
    learning_rate: Optional[float] = Field(None, gt=0)
    bank_capacity: int = Field(8, ge=1)
    armijo_sigma: float = Field(0.1, gt=0, lt=1)
    armijo_shrink: float = Field(0.5, gt=0, lt=1)
    max_backtracks: int = Field(20, ge=0)
    growth_factor: float = Field(2.0, gt=1)
    max_doublings: int = Field(16, ge=0)
    safety_tol: float = Field(1e-9, ge=0)
    epochs: int = Field(200, ge=0)
    batch_size: int = Field(64, ge=1)
    penalty_weight: float = Field(1.0, ge=0)
    rng_seed: int = Field(0, ge=0)
    audit: bool = False


class RegressionConfig(_Config):
    grid_size: int = Field(64, ge=2)
    grid_lo: float = -3.0
    grid_hi: float = 3.0
    bound: float = Field(1.4, ge=0)
    eval_size: int = Field(256, ge=1)
    eval_seed: int = Field(12345, ge=0)

    @model_validator(mode="after")
    def _check_range(self) -> RegressionConfig:
        if not self.grid_lo < self.grid_hi:
            raise ValueError("grid_lo must be below grid_hi")
        return self


class ControlConfig(_Config):
    dt: float = Field(0.1, gt=0)
    state_bound: float = Field(15.0, gt=0)
    input_bound: float = Field(1.0, gt=0)
    state_weight: float = Field(1.0, gt=0)
    input_weight: float = Field(1.0, gt=0)
    target_kind: TargetKind = TargetKind.BALL
    target_radius: float = Field(0.01, gt=0)
    grid_resolution: int = Field(50, ge=2)
    value_horizon: int = Field(3000, ge=1)
    reachable_horizon: int = Field(2000, ge=1)
    rollouts_per_epoch: int = Field(32, ge=1)
    rollout_steps: int = Field(200, ge=1)
    max_resample: int = Field(10, ge=0)
    expert_gain: float = 2.0
    expert_noise_std: float = Field(0.4, ge=0)
    decrease_slack: float = Field(0.0, ge=0, lt=1)
    example_state: Tuple[float, float] = (-6.0, 4.0)
    expert_seed: int = Field(7, ge=0)


class ExperimentConfig(_Config):
    task: TaskKind = TaskKind.REGRESSION
    mode: TrainMode = TrainMode.SCPO
    net: NetConfig = NetConfig()
    trainer: TrainerConfig = TrainerConfig()
    regression: RegressionConfig = RegressionConfig()
    control: ControlConfig = ControlConfig()
    out_dir: str = "runs/default"

    @model_validator(mode="after")
    def _check_mode(self) -> ExperimentConfig:
        if self.task is TaskKind.DOUBLE_INTEGRATOR and self.mode is TrainMode.SOFT_PENALTY:
            raise ValueError("soft-penalty mode is only defined for the regression task")
        return self

    @property
    def learning_rate(self) -> float:
        if self.trainer.learning_rate is not None:
            return self.trainer.learning_rate
        return 1e-2 if self.task is TaskKind.REGRESSION else 1e-3

    @property
    def seeds(self) -> Dict[str, int]:
        seeds = {"rng_seed": self.trainer.rng_seed, "net_seed": self.net.rng_seed}
        if self.task is TaskKind.REGRESSION:
            seeds["eval_seed"] = self.regression.eval_seed
        else:
            seeds["expert_seed"] = self.control.expert_seed
        return seeds


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e}") from e


def load_config(
    path: Union[str, Path, None],
    *,
    out: Union[str, Path, None] = None,
    seed: Optional[int] = None,
    mode: Optional[TrainMode] = None,
) -> ExperimentConfig:
    """
    Read an experiment config from a JSON file (defaults when `path` is None)
    and apply command-line overrides.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    if out is not None:
        data["out_dir"] = str(out)
    if seed is not None:
        data["trainer"] = {**(data.get("trainer") or {}), "rng_seed": seed}
    if mode is not None:
        data["mode"] = mode.value
    return parse_config(data)
