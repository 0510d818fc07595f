from __future__ import annotations

from typing import Protocol, Tuple, runtime_checkable

import numpy as np

from scpo.errors import MetricError
from scpo.types import Array, ParamVector


@runtime_checkable
class SafetyMetric(Protocol):
    """
    Pointwise safety evaluator g: theta -> R^k. The parameters are safe when
    every component is <= 0. Implementations must be deterministic.
    """

    @property
    def k(self) -> int: ...

    def evaluate(self, params: ParamVector) -> Array: ...


@runtime_checkable
class PenaltyMetric(SafetyMetric, Protocol):
    """A metric that can also differentiate weight * sum(max(g, 0)) in theta."""

    def penalty_gradient(self, params: ParamVector, weight: float) -> Tuple[float, ParamVector]: ...


def evaluate_metric(metric: SafetyMetric, params: ParamVector) -> Array:
    """
    Evaluate `metric` at `params`, normalizing the output to a float vector of
    length k. Failures inside the metric surface as MetricError.
    """
    try:
        values = metric.evaluate(np.asarray(params, dtype=np.float64))
    except MetricError:
        raise
    except Exception as e:
        raise MetricError(f"safety metric evaluation failed: {e}") from e
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.shape[0] != metric.k:
        raise MetricError(f"metric returned {values.shape[0]} values, expected k={metric.k}")
    if np.any(np.isnan(values)):
        raise MetricError("metric returned NaN")
    return values
