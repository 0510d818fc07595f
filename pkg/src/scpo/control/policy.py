from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scpo.control.lqr import BackupController
from scpo.control.target import TargetSet
from scpo.net.policy import PolicyNet
from scpo.types import Array


@dataclass(frozen=True)
class ResidualPolicy:
    """
    pi_theta(x) = clip(pi_safe(x) + phi_theta(x)) outside the target set and
    pi_safe(x) inside it.
    """

    backup: BackupController
    net: PolicyNet
    target: TargetSet

    def _split(self, X: Array):
        X = np.array(X, dtype=np.float64, ndmin=2)
        u_safe = self.backup(X)
        raw = u_safe + self.net.forward_batch(X)
        inside = self.target.contains(X)
        return X, u_safe, raw, inside

    def __call__(self, X: Array) -> Array:
        _, u_safe, raw, inside = self._split(X)
        return np.where(inside[:, None], u_safe, self.backup.clip(raw))

    def residual_jacobian_mask(self, X: Array) -> Array:
        """
        d pi_theta / d phi_theta per output: 1 where the residual passes through
        the clip unsaturated, 0 inside the target set or at a saturated bound.
        """
        _, _, raw, inside = self._split(X)
        passing = (raw > self.backup.input_lo) & (raw < self.backup.input_hi)
        return (passing & ~inside[:, None]).astype(np.float64)

    @property
    def backup_only(self) -> BackupController:
        return self.backup
