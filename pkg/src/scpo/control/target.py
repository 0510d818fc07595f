from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from scpo.types import Array


class TargetKind(str, Enum):
    BALL = "ball"
    LEVEL_SET = "level-set"


@dataclass(frozen=True)
class TargetSet:
    """
    Terminal set around the origin: either the ball |x| <= radius or the
    sublevel set x^T P x <= radius of the backup controller's LQR value.
    """

    kind: TargetKind
    radius: float
    P: Optional[Array] = None

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"target radius must be positive, got {self.radius}")
        if self.kind is TargetKind.LEVEL_SET and self.P is None:
            raise ValueError("a level-set target needs the value matrix P")

    @classmethod
    def ball(cls, radius: float = 0.01) -> TargetSet:
        return cls(TargetKind.BALL, radius)

    @classmethod
    def level_set(cls, P: Array, level: float) -> TargetSet:
        return cls(TargetKind.LEVEL_SET, level, np.asarray(P, dtype=np.float64))

    def contains(self, X: Array) -> Array:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind is TargetKind.BALL:
            return np.linalg.norm(X, axis=1) <= self.radius
        return np.einsum("ij,jk,ik->i", X, self.P, X) <= self.radius
