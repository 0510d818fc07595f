from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from scpo.errors import DimensionError, UnsafeReferenceError
from scpo.projection.bank import UpdateBank
from scpo.projection.smoothness import SmoothnessVector
from scpo.types import Array

# Largest constraint value still accepted as safe.
SAFETY_TOL = 1e-9
# Largest constraint value a solver answer may carry.
FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class GramData:
    S: Array
    diag_s: Array
    e_m: Array

    @classmethod
    def from_deltas(cls, D: Array) -> GramData:
        S = D.T @ D
        # exact symmetry; the product is symmetric only up to rounding
        S = 0.5 * (S + S.T)
        diag_s = np.einsum("ij,ij->j", D, D)
        np.fill_diagonal(S, diag_s)
        e_m = np.zeros(D.shape[1])
        e_m[-1] = 1.0
        return cls(S=S, diag_s=diag_s, e_m=e_m)


@dataclass(frozen=True)
class ProjectionProblem:
    """
    Projection of the raw step onto the sampled safe region, over c in R^m:

        min_c  (c - e_m)^T S (c - e_m)
        s.t.   (1 - 1^T c) g_ref + G c + 1/2 (c^T S c + |c|^T diag(S)) L <= 0

    Columns whose evaluation is not finite are inactive: c_i is pinned to 0.
    """

    D: Array
    gram: GramData
    G: Array
    g_ref: Array
    L: Array
    active: Array

    @property
    def m(self) -> int:
        return int(self.G.shape[1])

    @property
    def k(self) -> int:
        return int(self.G.shape[0])

    @property
    def S(self) -> Array:
        return self.gram.S

    @property
    def diag_s(self) -> Array:
        return self.gram.diag_s

    def _finite_G(self) -> Array:
        return np.where(self.active[None, :], self.G, 0.0)

    def constraint_values(self, c: Array, a: Optional[Array] = None) -> Array:
        """
        Left-hand side of every constraint. `a` stands in for |c| (a >= |c|
        gives an upper bound); +inf when an inactive column carries weight.
        """
        c = np.asarray(c, dtype=np.float64).reshape(-1)
        if c.shape[0] != self.m:
            raise DimensionError(f"c has length {c.shape[0]}, problem has m={self.m}")
        if np.any(c[~self.active] != 0.0):
            return np.full(self.k, np.inf)
        a = np.abs(c) if a is None else np.asarray(a, dtype=np.float64).reshape(-1)
        quad = float(c @ self.S @ c) + float(a @ self.diag_s)
        return (1.0 - c.sum()) * self.g_ref + self._finite_G() @ c + 0.5 * quad * self.L

    def max_violation(self, c: Array) -> float:
        return float(np.max(self.constraint_values(c)))

    def objective(self, c: Array) -> float:
        r = np.asarray(c, dtype=np.float64).reshape(-1) - self.gram.e_m
        return float(r @ self.S @ r)

    def to_dict(self) -> dict:
        return {
            "S": self.S.tolist(),
            "G": np.where(np.isfinite(self.G), self.G, None).tolist(),
            "g_ref": self.g_ref.tolist(),
            "L": self.L.tolist(),
            "active": self.active.tolist(),
        }


def build_problem(
    bank: UpdateBank,
    g_ref: Optional[Array] = None,
    L: Union[SmoothnessVector, Array, None] = None,
    *,
    tol: float = SAFETY_TOL,
) -> ProjectionProblem:
    if len(bank) == 0:
        raise ValueError("build_problem(): bank is empty")
    g_ref = bank.reference_g if g_ref is None else np.asarray(g_ref, dtype=np.float64).reshape(-1)
    if g_ref.shape[0] != bank.k:
        raise DimensionError(f"g_ref has length {g_ref.shape[0]}, bank holds k={bank.k}")
    if not np.all(np.isfinite(g_ref)) or np.any(g_ref > tol):
        raise UnsafeReferenceError(
            f"reference safety values must be <= 0, got max {float(np.max(g_ref)):.3e}"
        )

    if L is None:
        L_vec = np.zeros(bank.k)
    elif isinstance(L, SmoothnessVector):
        L_vec = L.L
    else:
        L_vec = np.asarray(L, dtype=np.float64).reshape(-1)
    if L_vec.shape[0] != bank.k:
        raise DimensionError(f"L has length {L_vec.shape[0]}, bank holds k={bank.k}")

    D = bank.delta_matrix()
    G = bank.g_matrix()
    return ProjectionProblem(
        D=D,
        gram=GramData.from_deltas(D),
        G=G,
        g_ref=g_ref.copy(),
        L=np.asarray(L_vec, dtype=np.float64).copy(),
        active=np.all(np.isfinite(G), axis=0),
    )
