from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import List, Tuple

from scpo.errors import ConfigError


class Activation(str, Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    SOFTPLUS = "softplus"
    RELU = "relu"


@dataclass(frozen=True)
class NetSpec:
    """
    Shape of the residual network phi_theta.

    An input block maps input_dim -> hidden_width, then num_blocks - 1 blocks map
    hidden_width -> hidden_width, then a linear output layer maps
    hidden_width -> output_dim. The output layer is the one zeroed at initialization.
    """

    input_dim: int
    output_dim: int
    hidden_width: int = 64
    num_blocks: int = 7
    activation: Activation = Activation.TANH
    skip_connections: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("input_dim", "output_dim", "hidden_width", "num_blocks"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"NetSpec.{name} must be a positive integer, got {value!r}")
        if self.rng_seed < 0:
            raise ConfigError(f"NetSpec.rng_seed must be unsigned, got {self.rng_seed!r}")
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        """(fan_out, fan_in) of every affine layer, output layer last."""
        w = self.hidden_width
        shapes = [(w, self.input_dim)]
        shapes.extend((w, w) for _ in range(self.num_blocks - 1))
        shapes.append((self.output_dim, w))
        return shapes

    @property
    def num_params(self) -> int:
        i, o, w, n = self.input_dim, self.output_dim, self.hidden_width, self.num_blocks
        return (i * w + w) + (n - 1) * (w * w + w) + (w * o + o)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["activation"] = self.activation.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> NetSpec:
        return cls(**data)
