from scpo.training.log import COLUMNS, EpochRecord, TrainLog, read_log_rows
from scpo.training.state import TrainState
from scpo.training.tasks import (
    DoubleIntegratorTask,
    RegressionTask,
    Task,
    build_task,
    target_function,
)
from scpo.training.trainer import ScpoTrainer, TrainResult, batch_sampler, train

__all__ = [
    "Task",
    "RegressionTask",
    "DoubleIntegratorTask",
    "build_task",
    "target_function",
    "TrainState",
    "EpochRecord",
    "TrainLog",
    "COLUMNS",
    "read_log_rows",
    "ScpoTrainer",
    "TrainResult",
    "batch_sampler",
    "train",
]
