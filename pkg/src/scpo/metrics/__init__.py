from scpo.metrics.base import PenaltyMetric, SafetyMetric, evaluate_metric
from scpo.metrics.grid_bound import (
    GridBoundMetric,
    ViolationSummary,
    eval_grid_bound,
    eval_policy_bound,
    uniform_grid,
    violation_summary,
)

__all__ = [
    "SafetyMetric",
    "PenaltyMetric",
    "evaluate_metric",
    "GridBoundMetric",
    "ViolationSummary",
    "eval_grid_bound",
    "eval_policy_bound",
    "uniform_grid",
    "violation_summary",
]
