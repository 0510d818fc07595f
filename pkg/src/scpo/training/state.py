from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from scpo.projection.bank import UpdateBank
from scpo.projection.smoothness import SmoothnessVector
from scpo.types import Array, ParamVector


@dataclass(frozen=True)
class TrainState:
    """Current iterate with its verified safety value and the update bank around it."""

    params: ParamVector
    g_value: Array
    epoch: int = 0
    bank: Optional[UpdateBank] = None
    smoothness: Optional[SmoothnessVector] = None

    def advance(self, **changes) -> TrainState:
        return replace(self, epoch=self.epoch + 1, **changes)
