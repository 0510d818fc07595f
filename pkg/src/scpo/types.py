from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from scpo.errors import DimensionError

Array = NDArray[np.float64]

# Flat vector of every trainable parameter, length d.
ParamVector = NDArray[np.float64]

# Batched feedback law: (N, n_x) states -> (N, n_u) inputs.
Policy = Callable[[Array], Array]


def as_param_vector(values, d: int | None = None) -> ParamVector:
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    if d is not None and vec.shape[0] != d:
        raise DimensionError(f"expected a parameter vector of length {d}, got {vec.shape[0]}")
    return vec


def _as_rows(values) -> Array:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        # a flat sequence is a column of scalar samples
        return arr.reshape(-1, 1)
    return arr


@dataclass(frozen=True)
class Batch:
    """
    Supervised batch: row i of `inputs` is labelled by row i of `targets`.
    """

    inputs: Array
    targets: Array

    def __post_init__(self) -> None:
        inputs = _as_rows(self.inputs)
        targets = _as_rows(self.targets)
        if inputs.shape[0] != targets.shape[0]:
            raise DimensionError(
                f"batch has {inputs.shape[0]} inputs but {targets.shape[0]} targets"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def __repr__(self) -> str:
        return f"Batch(size={len(self)}, in={self.inputs.shape[1]}, out={self.targets.shape[1]})"
