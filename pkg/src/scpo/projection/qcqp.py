from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from scpo.types import Array


@dataclass(frozen=True)
class QuadraticForms:
    """
    A stack of p quadratic functions of x in R^n:

        f_i(x) = 1/2 x^T P_i x + q_i^T x + r_i

    P: (p, n, n), q: (p, n), r: (p,).
    """

    P: Array
    q: Array
    r: Array

    def __post_init__(self) -> None:
        P = np.asarray(self.P, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        r = np.asarray(self.r, dtype=np.float64).reshape(-1)
        p, n = q.shape
        if P.shape != (p, n, n) or r.shape != (p,):
            raise ValueError(f"inconsistent quadratic forms: P{P.shape}, q{q.shape}, r{r.shape}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @property
    def count(self) -> int:
        return int(self.q.shape[0])

    @property
    def dim(self) -> int:
        return int(self.q.shape[1])

    def values(self, x: Array) -> Array:
        return 0.5 * np.einsum("i,pij,j->p", x, self.P, x) + self.q @ x + self.r

    def gradients(self, x: Array) -> Array:
        return self.P @ x + self.q

    @staticmethod
    def stack(*forms: QuadraticForms) -> QuadraticForms:
        return QuadraticForms(
            P=np.concatenate([f.P for f in forms]),
            q=np.concatenate([f.q for f in forms]),
            r=np.concatenate([f.r for f in forms]),
        )

    @staticmethod
    def linear(A: Array, b: Array) -> QuadraticForms:
        """Rows of A x - b."""
        A = np.asarray(A, dtype=np.float64)
        p, n = A.shape
        return QuadraticForms(P=np.zeros((p, n, n)), q=A, r=-np.asarray(b, dtype=np.float64))


@dataclass(frozen=True)
class BarrierOptions:
    t0: float = 1.0
    mu: float = 10.0
    gap_tol: float = 1e-10
    newton_tol: float = 1e-12
    max_newton: int = 80
    max_outer: int = 40
    hessian_reg: float = 1e-10
    armijo: float = 0.25
    max_halvings: int = 80


@dataclass(frozen=True)
class BarrierResult:
    x: Array
    converged: bool
    gap: float
    newton_steps: int


def barrier_minimize(
    objective: QuadraticForms,
    constraints: QuadraticForms,
    x0: Array,
    options: BarrierOptions = BarrierOptions(),
    stop: Optional[Callable[[Array], bool]] = None,
) -> BarrierResult:
    """
    Log-barrier interior point for min f_0(x) s.t. f_i(x) <= 0, all convex quadratics.

    `x0` must be strictly feasible. Newton's method centers each barrier subproblem;
    the barrier weight t grows by `mu` until the duality-gap bound p/t drops below
    `gap_tol`. `hessian_reg` is added to the Newton matrix only, so the feasible set
    is untouched. `stop(x)` may end the run early after any centering pass.
    """
    if objective.count != 1:
        raise ValueError("objective must be a single quadratic form")
    x = np.asarray(x0, dtype=np.float64).copy()
    if np.any(constraints.values(x) >= 0.0):
        raise ValueError("barrier_minimize(): starting point is not strictly feasible")

    p = constraints.count
    n = x.shape[0]
    t = options.t0
    steps = 0
    P0, q0 = objective.P[0], objective.q[0]
    reg = options.hessian_reg * np.eye(n)

    def phi(y: Array, tt: float) -> float:
        f = constraints.values(y)
        if np.any(f >= 0.0):
            return np.inf
        return tt * float(objective.values(y)[0]) - float(np.sum(np.log(-f)))

    for _ in range(options.max_outer):
        for _ in range(options.max_newton):
            f = constraints.values(x)
            J = constraints.gradients(x)
            inv = 1.0 / (-f)
            grad = t * (P0 @ x + q0) + J.T @ inv
            hess = (
                t * P0
                + (J * (inv**2)[:, None]).T @ J
                + np.einsum("p,pij->ij", inv, constraints.P)
                + reg
            )
            try:
                dx = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                dx = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(-grad @ dx)
            if not np.isfinite(decrement):
                return BarrierResult(x=x, converged=False, gap=p / t, newton_steps=steps)
            if decrement / 2.0 <= options.newton_tol:
                break

            s = 1.0
            phi_x = phi(x, t)
            for _ in range(options.max_halvings):
                if phi(x + s * dx, t) <= phi_x - options.armijo * s * decrement:
                    break
                s *= 0.5
            else:
                break
            x = x + s * dx
            steps += 1

        if stop is not None and stop(x):
            return BarrierResult(x=x, converged=True, gap=p / t, newton_steps=steps)
        if p / t < options.gap_tol:
            return BarrierResult(x=x, converged=True, gap=p / t, newton_steps=steps)
        t *= options.mu

    return BarrierResult(x=x, converged=False, gap=p / t, newton_steps=steps)


def find_strictly_feasible(
    constraints: QuadraticForms,
    x0: Array,
    options: BarrierOptions = BarrierOptions(),
) -> Optional[Array]:
    """
    Phase I: minimize s subject to f_i(x) <= s and s >= -1, starting from x0.
    Returns a point with every f_i(x) < 0, or None if the interior looks empty.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.shape[0]
    p = constraints.count

    P = np.zeros((p + 1, n + 1, n + 1))
    P[:p, :n, :n] = constraints.P
    q = np.zeros((p + 1, n + 1))
    q[:p, :n] = constraints.q
    q[:p, n] = -1.0
    q[p, n] = -1.0
    r = np.concatenate([constraints.r, [-1.0]])
    lifted = QuadraticForms(P=P, q=q, r=r)

    obj_q = np.zeros((1, n + 1))
    obj_q[0, n] = 1.0
    objective = QuadraticForms(P=np.zeros((1, n + 1, n + 1)), q=obj_q, r=np.zeros(1))

    s0 = max(float(np.max(constraints.values(x0))) + 1.0, 0.0)
    start = np.concatenate([x0, [s0]])

    def feasible(y: Array) -> bool:
        return bool(np.all(constraints.values(y[:n]) < 0.0))

    result = barrier_minimize(objective, lifted, start, options, stop=feasible)
    x = result.x[:n]
    return x if np.all(constraints.values(x) < 0.0) else None
