from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from scpo.types import Array


@dataclass(frozen=True)
class MaliciousExpert:
    """
    Aggressive linear feedback clip(-gain * sum(x) + delta, lo, hi) with
    delta ~ N(0, noise_std^2). Its labels are what the learned policy imitates.
    """

    gain: float = 2.0
    noise_std: float = 0.4
    input_lo: float = -1.0
    input_hi: float = 1.0

    def noise_free(self, X: Array) -> Array:
        X = np.array(X, dtype=np.float64, ndmin=2)
        return np.clip(-self.gain * X.sum(axis=1, keepdims=True), self.input_lo, self.input_hi)

    def labels(self, X: Array, rng: np.random.Generator) -> Array:
        X = np.array(X, dtype=np.float64, ndmin=2)
        delta = rng.normal(0.0, self.noise_std, size=(X.shape[0], 1))
        return np.clip(
            -self.gain * X.sum(axis=1, keepdims=True) + delta, self.input_lo, self.input_hi
        )

    def as_policy(self, seed: int) -> Callable[[Array], Array]:
        """Noisy closed-loop policy drawing its noise from a generator seeded by `seed`."""
        rng = np.random.default_rng(seed)
        return lambda X: self.labels(X, rng)
