from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from scpo.control.system import LinearSystem, StageCost, clip
from scpo.errors import ConvergenceError, DimensionError
from scpo.logger import get_logger
from scpo.types import Array

logger = get_logger(__name__)


def solve_dare(
    A: Array,
    B: Array,
    Q: Array,
    R: Array,
    *,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> Tuple[Array, Array]:
    """
    Solve the discrete algebraic Riccati equation by fixed-point iteration of

        P <- Q + A^T (P - P B (R + B^T P B)^-1 B^T P) A

    starting from P = Q, until the max-abs change is <= tol.
    Returns (P, K) with K = (R + B^T P B)^-1 B^T P A, so u = -K x.
    """
    A = np.array(A, dtype=np.float64, ndmin=2)
    B = np.array(B, dtype=np.float64, ndmin=2)
    Q = np.array(Q, dtype=np.float64, ndmin=2)
    R = np.array(R, dtype=np.float64, ndmin=2)
    n_x, n_u = B.shape
    if A.shape != (n_x, n_x) or Q.shape != (n_x, n_x) or R.shape != (n_u, n_u):
        raise DimensionError(
            f"inconsistent shapes A{A.shape} B{B.shape} Q{Q.shape} R{R.shape} for DARE"
        )

    P = Q.copy()
    for it in range(1, max_iter + 1):
        BtP = B.T @ P
        gain = np.linalg.solve(R + BtP @ B, BtP)
        P_next = Q + A.T @ (P - P @ B @ gain) @ A
        P_next = 0.5 * (P_next + P_next.T)
        change = float(np.max(np.abs(P_next - P)))
        P = P_next
        if not np.all(np.isfinite(P)):
            break
        if change <= tol:
            K = np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
            logger.debug("DARE converged after %d iterations", it)
            return P, K
    raise ConvergenceError(
        f"Riccati iteration did not converge within {max_iter} iterations; "
        "check that (A, B) is stabilizable"
    )


def riccati_residual(A: Array, B: Array, Q: Array, R: Array, P: Array) -> float:
    BtPA = B.T @ P @ A
    rhs = Q + A.T @ P @ A - BtPA.T @ np.linalg.solve(R + B.T @ P @ B, BtPA)
    return float(np.max(np.abs(P - rhs)))


@dataclass(frozen=True)
class BackupController:
    """Clipped linear feedback pi_safe(x) = clip(-K x, lo, hi)."""

    K: Array
    P: Array
    input_lo: Array
    input_hi: Array

    @classmethod
    def lqr(cls, system: LinearSystem, cost: StageCost) -> BackupController:
        P, K = solve_dare(system.A, system.B, cost.Q, cost.R)
        return cls(K=K, P=P, input_lo=system.input_lo, input_hi=system.input_hi)

    def clip(self, U: Array) -> Array:
        return clip(U, self.input_lo, self.input_hi)

    def __call__(self, X: Array) -> Array:
        return self.clip(-(X @ self.K.T))

    def closed_loop_radius(self, system: LinearSystem) -> float:
        """Spectral radius of A - B K, the unclipped closed loop."""
        return float(np.max(np.abs(np.linalg.eigvals(system.A - system.B @ self.K))))

    def lqr_value(self, X: Array) -> Array:
        return np.einsum("ij,jk,ik->i", X, self.P, X)
