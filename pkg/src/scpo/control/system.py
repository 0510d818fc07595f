from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scpo.errors import DimensionError
from scpo.types import Array


def _matrix(values, name: str) -> Array:
    arr = np.array(values, dtype=np.float64, ndmin=2)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got shape {arr.shape}")
    return arr


def _vector(values, n: int, name: str) -> Array:
    arr = np.broadcast_to(np.asarray(values, dtype=np.float64), (n,)).copy()
    arr.setflags(write=False)
    return arr


def clip(u: Array, lo: Array, hi: Array) -> Array:
    return np.clip(u, lo, hi)


@dataclass(frozen=True)
class LinearSystem:
    """
    x_{k+1} = A x_k + B u_k with box constraints on states and inputs.

    All methods are batched: states are (N, n_x) rows, inputs (N, n_u) rows.
    """

    A: Array
    B: Array
    state_lo: Array
    state_hi: Array
    input_lo: Array
    input_hi: Array
    dt: float = 0.1

    def __post_init__(self) -> None:
        A = _matrix(self.A, "A")
        B = _matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionError(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        n_x, n_u = B.shape
        boxes = {
            "state_lo": _vector(self.state_lo, n_x, "state_lo"),
            "state_hi": _vector(self.state_hi, n_x, "state_hi"),
            "input_lo": _vector(self.input_lo, n_u, "input_lo"),
            "input_hi": _vector(self.input_hi, n_u, "input_hi"),
        }
        for side in ("state", "input"):
            lo, hi = boxes[f"{side}_lo"], boxes[f"{side}_hi"]
            if not (np.all(lo < 0.0) and np.all(hi > 0.0)):
                raise ValueError(f"{side} box must contain the origin strictly, got [{lo}, {hi}]")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        for name, value in boxes.items():
            object.__setattr__(self, name, value)

    @property
    def n_x(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_u(self) -> int:
        return int(self.B.shape[1])

    def step(self, X: Array, U: Array) -> Array:
        return X @ self.A.T + U @ self.B.T

    def clip_input(self, U: Array) -> Array:
        return clip(U, self.input_lo, self.input_hi)

    def in_state_box(self, X: Array) -> Array:
        return np.all((X >= self.state_lo) & (X <= self.state_hi), axis=1)

    def in_input_box(self, U: Array) -> Array:
        return np.all((U >= self.input_lo) & (U <= self.input_hi), axis=1)


def double_integrator(
    dt: float = 0.1, state_bound: float = 15.0, input_bound: float = 1.0
) -> LinearSystem:
    """Zero-order-hold double integrator: position and velocity driven by acceleration."""
    A = np.array([[1.0, dt], [0.0, 1.0]])
    B = np.array([[0.5 * dt**2], [dt]])
    return LinearSystem(
        A=A,
        B=B,
        state_lo=np.full(2, -state_bound),
        state_hi=np.full(2, state_bound),
        input_lo=np.full(1, -input_bound),
        input_hi=np.full(1, input_bound),
        dt=dt,
    )


@dataclass(frozen=True)
class StageCost:
    """c(x, u) = x^T Q x + u^T R u with Q, R symmetric positive definite."""

    Q: Array
    R: Array

    def __post_init__(self) -> None:
        for name in ("Q", "R"):
            M = _matrix(getattr(self, name), name)
            if M.shape[0] != M.shape[1] or not np.allclose(M, M.T):
                raise ValueError(f"{name} must be a symmetric matrix")
            if float(np.min(np.linalg.eigvalsh(M))) <= 0.0:
                raise ValueError(f"{name} must be positive definite")
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @classmethod
    def identity(cls, n_x: int, n_u: int, state_weight: float = 1.0, input_weight: float = 1.0):
        return cls(Q=state_weight * np.eye(n_x), R=input_weight * np.eye(n_u))

    def __call__(self, X: Array, U: Array) -> Array:
        return np.einsum("ij,jk,ik->i", X, self.Q, X) + np.einsum("ij,jk,ik->i", U, self.R, U)
