from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from scpo.projection.bank import UpdateBank
from scpo.types import Array


@dataclass(frozen=True)
class SmoothnessVector:
    """
    Per-constraint curvature bounds L_j >= 0 used to make the linearized
    constraints conservative.
    """

    L: Array
    growth_factor: float = 2.0
    max_doublings: int = 16

    def __post_init__(self) -> None:
        L = np.asarray(self.L, dtype=np.float64).reshape(-1).copy()
        if np.any(~np.isfinite(L)) or np.any(L < 0.0):
            raise ValueError(f"smoothness constants must be finite and >= 0, got {L}")
        if self.growth_factor <= 1.0:
            raise ValueError(f"growth_factor must exceed 1, got {self.growth_factor}")
        if self.max_doublings < 0:
            raise ValueError(f"max_doublings must be >= 0, got {self.max_doublings}")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)

    @property
    def k(self) -> int:
        return int(self.L.shape[0])

    def with_values(self, L: Array) -> SmoothnessVector:
        return SmoothnessVector(L, self.growth_factor, self.max_doublings)

    def grown(self, floor: Optional[Array] = None) -> SmoothnessVector:
        """
        Multiply by the growth factor. Components that stay zero take `floor`
        (the curvature implied by an observed overshoot) when one is given.
        """
        L = self.L * self.growth_factor
        if floor is not None:
            floor = np.asarray(floor, dtype=np.float64).reshape(-1)
            zero = L == 0.0
            L = np.where(zero & np.isfinite(floor), np.maximum(floor, 0.0), L)
        return self.with_values(L)


def implied_curvature(g_new: Array, g_ref: Array, delta_norm_sq: float) -> Array:
    """2 |g(theta + delta) - g(theta)| / |delta|^2, zero where undefined."""
    g_new = np.asarray(g_new, dtype=np.float64)
    g_ref = np.asarray(g_ref, dtype=np.float64)
    if delta_norm_sq <= 0.0:
        return np.zeros_like(g_ref)
    slope = 2.0 * np.abs(g_new - g_ref) / delta_norm_sq
    return np.where(np.isfinite(slope), slope, 0.0)


def estimate_initial_L(
    bank: UpdateBank,
    g_ref: Array,
    *,
    growth_factor: float = 2.0,
    max_doublings: int = 16,
) -> SmoothnessVector:
    """
    Largest observed slope 2|g_j(theta + delta_i) - g_ref_j| / |delta_i|^2 over the bank.

    Only entries with a nonzero step and a finite evaluation contribute. This is an
    optimistic lower bound on the true local curvature; the adaptive loop grows it
    whenever a projected step fails verification.
    """
    g_ref = np.asarray(g_ref, dtype=np.float64).reshape(-1)
    L = np.zeros_like(g_ref)
    for entry in bank.entries:
        norm_sq = float(entry.delta @ entry.delta)
        if norm_sq == 0.0 or not np.all(np.isfinite(entry.g_value)):
            continue
        L = np.maximum(L, implied_curvature(entry.g_value, g_ref, norm_sq))
    return SmoothnessVector(L, growth_factor=growth_factor, max_doublings=max_doublings)
