from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from scpo.errors import MetricError
from scpo.logger import get_logger
from scpo.metrics.base import SafetyMetric, evaluate_metric
from scpo.projection.audit import ProjectionAudit
from scpo.projection.bank import UpdateBank
from scpo.projection.problem import SAFETY_TOL, build_problem
from scpo.projection.smoothness import SmoothnessVector, implied_curvature
from scpo.projection.solver import (
    ProjectionResult,
    ProjectionStatus,
    SolverOptions,
    solve_projection,
    zero_step,
)
from scpo.types import Array, ParamVector

logger = get_logger(__name__)


@dataclass(frozen=True)
class VerifiedProjection:
    """
    Accepted projection, the smoothness constants it was solved with, and the
    true safety value at theta + delta_star (g_ref itself for a zero step).
    """

    result: ProjectionResult
    smoothness: SmoothnessVector
    g_value: Array
    doublings: int


def is_safe(g_value: Array, tol: float = SAFETY_TOL) -> bool:
    g_value = np.asarray(g_value, dtype=np.float64)
    return bool(np.all(np.isfinite(g_value)) and np.max(g_value) <= tol)


def adaptive_project_and_verify(
    bank: UpdateBank,
    g_ref: Array,
    L: SmoothnessVector,
    metric: SafetyMetric,
    theta: ParamVector,
    *,
    safety_tol: float = SAFETY_TOL,
    options: SolverOptions = SolverOptions(),
    audit: Optional[ProjectionAudit] = None,
) -> VerifiedProjection:
    """
    Solve the projection and check the answer against the true metric.

    Whenever theta + delta_star violates the metric, L is grown by its growth factor
    and the problem re-solved. After `L.max_doublings` failed attempts the zero step
    is returned, which leaves theta and g unchanged.
    """
    g_ref = np.asarray(g_ref, dtype=np.float64).reshape(-1)
    theta = np.asarray(theta, dtype=np.float64)
    smoothness = L
    problem = None

    for attempt in range(smoothness.max_doublings + 1):
        problem = build_problem(bank, g_ref, smoothness, tol=safety_tol)
        result = solve_projection(problem, options)
        if audit is not None:
            audit.record(problem, result, attempt=attempt)
        if result.is_zero:
            return VerifiedProjection(result, smoothness, g_ref.copy(), attempt)

        g_new = evaluate_metric(metric, theta + result.delta_star)
        if g_new.shape != g_ref.shape:
            raise MetricError(f"metric returned {g_new.shape[0]} values, expected {g_ref.shape[0]}")
        if is_safe(g_new, safety_tol):
            logger.debug(
                "projection verified: status=%s attempt=%d max_g=%.3e",
                result.status.value,
                attempt,
                float(np.max(g_new)),
            )
            return VerifiedProjection(result, smoothness, g_new, attempt)

        step_sq = float(result.delta_star @ result.delta_star)
        floor = implied_curvature(g_new, g_ref, step_sq)
        logger.debug(
            "projection rejected: max_g=%.3e, growing L (max %.3e) attempt=%d",
            float(np.max(g_new)),
            float(np.max(smoothness.L)),
            attempt,
        )
        if attempt < smoothness.max_doublings:
            smoothness = smoothness.grown(floor)

    logger.warning(
        "smoothness doublings exhausted after %d attempts, taking the zero step",
        smoothness.max_doublings + 1,
    )
    fallback = zero_step(problem, ProjectionStatus.ZERO_STEP)
    return VerifiedProjection(fallback, smoothness, g_ref.copy(), smoothness.max_doublings)
