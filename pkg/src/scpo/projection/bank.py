from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Iterable, List, Optional

import numpy as np

from scpo.errors import DimensionError
from scpo.types import Array, ParamVector, as_param_vector


@dataclass(frozen=True)
class BankEntry:
    """
    One cached candidate: a step `delta` relative to the current reference
    parameters and the safety evaluation g(theta_ref + delta).
    """

    delta: ParamVector
    g_value: Array

    def __repr__(self) -> str:
        return (
            f"BankEntry(|delta|={float(np.linalg.norm(self.delta)):.3e}, "
            f"max_g={float(np.max(self.g_value)):.3e})"
        )


@dataclass
class UpdateBank:
    """
    Bounded FIFO of candidate updates (columns of D) and their safety
    evaluations (columns of G). Appending past `capacity` evicts the oldest entry;
    the newest entry is always the most recent raw gradient step.
    """

    capacity: int
    reference_g: Array
    _entries: Deque[BankEntry] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"bank capacity must be positive, got {self.capacity}")
        self.reference_g = np.asarray(self.reference_g, dtype=np.float64).reshape(-1).copy()
        self._entries = deque(maxlen=self.capacity)

    @classmethod
    def seeded(cls, capacity: int, d: int, reference_g: Array) -> UpdateBank:
        """A bank holding the zero step evaluated at the reference."""
        bank = cls(capacity=capacity, reference_g=reference_g)
        bank.append(np.zeros(d), reference_g)
        return bank

    @property
    def k(self) -> int:
        return int(self.reference_g.shape[0])

    @property
    def d(self) -> Optional[int]:
        if not self._entries:
            return None
        return int(self._entries[0].delta.shape[0])

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> List[BankEntry]:
        return list(self._entries)

    @property
    def latest(self) -> BankEntry:
        if not self._entries:
            raise IndexError("bank is empty")
        return self._entries[-1]

    def append(self, delta: Iterable[float], g_value: Iterable[float]) -> None:
        vec = as_param_vector(delta, self.d).copy()
        g = np.asarray(g_value, dtype=np.float64).reshape(-1).copy()
        if g.shape[0] != self.k:
            raise DimensionError(f"safety value has length {g.shape[0]}, bank holds k={self.k}")
        self._entries.append(BankEntry(delta=vec, g_value=g))

    def delta_matrix(self) -> Array:
        """D, shape (d, m)."""
        if not self._entries:
            raise IndexError("bank is empty")
        return np.stack([e.delta for e in self._entries], axis=1)

    def g_matrix(self) -> Array:
        """G, shape (k, m)."""
        if not self._entries:
            raise IndexError("bank is empty")
        return np.stack([e.g_value for e in self._entries], axis=1)

    def copy(self) -> UpdateBank:
        clone = UpdateBank(capacity=self.capacity, reference_g=self.reference_g)
        for e in self._entries:
            clone._entries.append(e)
        return clone

    def recenter(self, applied: ParamVector, reference_g: Optional[Array] = None) -> UpdateBank:
        """
        Re-express every entry relative to theta_ref + applied.

        Stored evaluations are unchanged: theta_ref + delta_i equals
        (theta_ref + applied) + (delta_i - applied).
        """
        applied = as_param_vector(applied, self.d)
        new_ref = self.reference_g if reference_g is None else reference_g
        clone = UpdateBank(capacity=self.capacity, reference_g=new_ref)
        if clone.k != self.k:
            raise DimensionError(f"reference g has length {clone.k}, bank holds k={self.k}")
        for e in self._entries:
            clone._entries.append(BankEntry(delta=e.delta - applied, g_value=e.g_value))
        return clone


def recenter(
    bank: UpdateBank, applied: ParamVector, reference_g: Optional[Array] = None
) -> UpdateBank:
    return bank.recenter(applied, reference_g)
