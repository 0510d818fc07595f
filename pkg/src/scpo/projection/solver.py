from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from scpo.logger import get_logger
from scpo.projection.problem import FEASIBILITY_TOL, ProjectionProblem
from scpo.projection.qcqp import (
    BarrierOptions,
    QuadraticForms,
    barrier_minimize,
    find_strictly_feasible,
)
from scpo.types import Array, ParamVector

logger = get_logger(__name__)


class ProjectionStatus(str, Enum):
    RAW_STEP_FEASIBLE = "raw-step-feasible"
    PROJECTED = "projected"
    ZERO_STEP = "zero-step"
    INFEASIBLE_FALLBACK = "infeasible-fallback"


@dataclass(frozen=True)
class SolverOptions:
    barrier: BarrierOptions = BarrierOptions()
    # bound on the lifted |c| variables; keeps every barrier subproblem bounded
    coefficient_bound: float = 1e4
    feasibility_tol: float = FEASIBILITY_TOL


@dataclass(frozen=True)
class ProjectionResult:
    c_star: Array
    delta_star: ParamVector
    objective: float
    status: ProjectionStatus
    max_constraint: float
    newton_steps: int = 0

    @property
    def is_zero(self) -> bool:
        return not np.any(self.delta_star)

    def __repr__(self) -> str:
        return (
            f"ProjectionResult(status={self.status.value}, objective={self.objective:.3e}, "
            f"|delta|={float(np.linalg.norm(self.delta_star)):.3e}, "
            f"max_constraint={self.max_constraint:.3e})"
        )

    def to_dict(self) -> dict:
        return {
            "c_star": self.c_star.tolist(),
            "objective": self.objective,
            "status": self.status.value,
            "max_constraint": self.max_constraint,
            "newton_steps": self.newton_steps,
        }


def zero_step(problem: ProjectionProblem, status: ProjectionStatus) -> ProjectionResult:
    c = np.zeros(problem.m)
    return ProjectionResult(
        c_star=c,
        delta_star=np.zeros(problem.D.shape[0]),
        objective=problem.objective(c),
        status=status,
        max_constraint=float(np.max(problem.g_ref)),
    )


def _result(problem: ProjectionProblem, c: Array, status: ProjectionStatus, steps: int):
    return ProjectionResult(
        c_star=c,
        delta_star=problem.D @ c,
        objective=problem.objective(c),
        status=status,
        max_constraint=problem.max_violation(c),
        newton_steps=steps,
    )


def _lifted_program(problem: ProjectionProblem, idx: Array, bound: float):
    """
    Objective and constraints over z = (c_A, a_A), A the active columns,
    with a_i >= |c_i| replacing the absolute values.
    """
    n = idx.shape[0]
    S = problem.S
    S_AA = S[np.ix_(idx, idx)]
    s_Am = S[idx, -1]
    scale = float(np.max(problem.diag_s[idx]))
    if scale <= 0.0:
        scale = 1.0

    P0 = np.zeros((1, 2 * n, 2 * n))
    P0[0, :n, :n] = 2.0 * S_AA / scale
    q0 = np.zeros((1, 2 * n))
    q0[0, :n] = -2.0 * s_Am / scale
    objective = QuadraticForms(P=P0, q=q0, r=np.array([S[-1, -1] / scale]))

    k = problem.k
    G_A = problem.G[:, idx]
    Pc = np.zeros((k, 2 * n, 2 * n))
    Pc[:, :n, :n] = problem.L[:, None, None] * S_AA[None, :, :]
    qc = np.zeros((k, 2 * n))
    qc[:, :n] = G_A - problem.g_ref[:, None]
    qc[:, n:] = 0.5 * problem.L[:, None] * problem.diag_s[idx][None, :]
    smooth = QuadraticForms(P=Pc, q=qc, r=problem.g_ref.copy())

    eye = np.eye(n)
    A_lin = np.block(
        [
            [eye, -eye],  # c - a <= 0
            [-eye, -eye],  # -c - a <= 0
            [np.zeros((n, n)), eye],  # a <= bound
        ]
    )
    b_lin = np.concatenate([np.zeros(2 * n), np.full(n, bound)])
    return objective, QuadraticForms.stack(smooth, QuadraticForms.linear(A_lin, b_lin))


def _interior_start(constraints: QuadraticForms, n: int, options: SolverOptions):
    z = np.zeros(2 * n)
    a0 = 1.0
    for _ in range(40):
        z[n:] = a0
        if np.all(constraints.values(z) < 0.0):
            return z
        a0 *= 0.1
    return find_strictly_feasible(constraints, z, options.barrier)


def solve_projection(
    problem: ProjectionProblem, options: SolverOptions = SolverOptions()
) -> ProjectionResult:
    """
    Solve the sampled projection problem.

    The raw step (c = e_m) is returned untouched when it already satisfies every
    constraint. Otherwise the problem is solved by a log-barrier method on the
    lifted variables (c, a), a >= |c|; any c it returns satisfies the original
    constraints because diag(S) >= 0 and L >= 0. Non-convergence yields the
    always-safe zero step.
    """
    e_m = problem.gram.e_m
    if problem.active[-1] and problem.max_violation(e_m) <= 0.0:
        return _result(problem, e_m.copy(), ProjectionStatus.RAW_STEP_FEASIBLE, 0)

    idx = np.flatnonzero(problem.active)
    if idx.size == 0 or float(np.max(problem.diag_s[idx])) == 0.0:
        return zero_step(problem, ProjectionStatus.ZERO_STEP)

    objective, constraints = _lifted_program(problem, idx, options.coefficient_bound)
    n = idx.size
    start = _interior_start(constraints, n, options)
    if start is None:
        logger.debug("projection: no strictly feasible start, taking the zero step")
        return zero_step(problem, ProjectionStatus.ZERO_STEP)

    solved = barrier_minimize(objective, constraints, start, options.barrier)
    if not solved.converged:
        logger.debug("projection: barrier stopped at gap %.2e, taking the zero step", solved.gap)
        return zero_step(problem, ProjectionStatus.ZERO_STEP)

    c = np.zeros(problem.m)
    c[idx] = solved.x[:n]
    if problem.max_violation(c) > options.feasibility_tol:
        return zero_step(problem, ProjectionStatus.INFEASIBLE_FALLBACK)
    return _result(problem, c, ProjectionStatus.PROJECTED, solved.newton_steps)
