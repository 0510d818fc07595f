from scpo.projection.adaptive import VerifiedProjection, adaptive_project_and_verify, is_safe
from scpo.projection.audit import ProjectionAudit
from scpo.projection.bank import BankEntry, UpdateBank, recenter
from scpo.projection.linesearch import armijo_search
from scpo.projection.problem import (
    FEASIBILITY_TOL,
    SAFETY_TOL,
    GramData,
    ProjectionProblem,
    build_problem,
)
from scpo.projection.smoothness import SmoothnessVector, estimate_initial_L, implied_curvature
from scpo.projection.solver import (
    ProjectionResult,
    ProjectionStatus,
    SolverOptions,
    solve_projection,
    zero_step,
)

__all__ = [
    "UpdateBank",
    "BankEntry",
    "recenter",
    "GramData",
    "ProjectionProblem",
    "build_problem",
    "SAFETY_TOL",
    "FEASIBILITY_TOL",
    "SmoothnessVector",
    "estimate_initial_L",
    "implied_curvature",
    "ProjectionResult",
    "ProjectionStatus",
    "SolverOptions",
    "solve_projection",
    "zero_step",
    "VerifiedProjection",
    "adaptive_project_and_verify",
    "is_safe",
    "armijo_search",
    "ProjectionAudit",
]
