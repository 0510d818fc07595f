from scpo.config import ExperimentConfig, load_config
from scpo.errors import ScpoError
from scpo.logger import configure_logging, get_logger
from scpo.net import NetSpec, PolicyNet
from scpo.projection import (
    ProjectionResult,
    ProjectionStatus,
    UpdateBank,
    adaptive_project_and_verify,
    solve_projection,
)
from scpo.training import ScpoTrainer, train

__all__ = [
    "ExperimentConfig",
    "load_config",
    "ScpoError",
    "configure_logging",
    "get_logger",
    "NetSpec",
    "PolicyNet",
    "UpdateBank",
    "ProjectionResult",
    "ProjectionStatus",
    "solve_projection",
    "adaptive_project_and_verify",
    "ScpoTrainer",
    "train",
]
