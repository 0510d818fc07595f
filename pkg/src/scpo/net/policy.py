from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from scpo.errors import DimensionError
from scpo.net.spec import Activation, NetSpec
from scpo.types import Array, Batch, ParamVector, as_param_vector

LossKind = str
MSE = "mean-squared-error"
_LOSS_ALIASES = {MSE: MSE, "mse": MSE}


def _sigmoid(z: Array) -> Array:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softplus(z: Array) -> Array:
    return np.logaddexp(0.0, z)


# activation -> (f(z), f'(z))
_ACTIVATIONS: Dict[Activation, Tuple[Callable[[Array], Array], Callable[[Array], Array]]] = {
    Activation.TANH: (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    Activation.SIGMOID: (_sigmoid, lambda z: _sigmoid(z) * (1.0 - _sigmoid(z))),
    Activation.SOFTPLUS: (_softplus, _sigmoid),
    Activation.RELU: (lambda z: np.maximum(z, 0.0), lambda z: (z > 0.0).astype(np.float64)),
}


@dataclass(frozen=True)
class PolicyNet:
    """
    Feedforward residual network phi_theta over a flat parameter vector.

    Parameters are laid out layer by layer, each layer as its weight matrix
    (row-major, fan_out x fan_in) followed by its bias. The vector is read-only;
    parameter updates produce a new net via `with_params`.
    """

    spec: NetSpec
    params: ParamVector

    def __post_init__(self) -> None:
        vec = as_param_vector(self.params, self.spec.num_params).copy()
        vec.setflags(write=False)
        object.__setattr__(self, "params", vec)

    def __repr__(self) -> str:
        s = self.spec
        return (
            f"PolicyNet(in={s.input_dim}, out={s.output_dim}, width={s.hidden_width}, "
            f"blocks={s.num_blocks}, activation={s.activation.value}, d={s.num_params})"
        )

    # -----------------------
    # Construction
    # -----------------------

    @classmethod
    def zero_residual(cls, spec: NetSpec) -> PolicyNet:
        """Seeded hidden layers, all-zero output layer: phi == 0 everywhere."""
        return cls(spec, _init_params(spec, zero_output=True))

    @classmethod
    def random(cls, spec: NetSpec) -> PolicyNet:
        """Every layer, output layer included, drawn from the seeded scheme."""
        return cls(spec, _init_params(spec, zero_output=False))

    def get_params(self) -> ParamVector:
        return self.params.copy()

    def with_params(self, params: ParamVector) -> PolicyNet:
        return PolicyNet(self.spec, params)

    set_params = with_params

    def layers(self) -> List[Tuple[Array, Array]]:
        """Read-only (W, b) views into the parameter vector, output layer last."""
        out: List[Tuple[Array, Array]] = []
        offset = 0
        for fan_out, fan_in in self.spec.layer_shapes:
            n_w = fan_out * fan_in
            W = self.params[offset : offset + n_w].reshape(fan_out, fan_in)
            offset += n_w
            b = self.params[offset : offset + fan_out]
            offset += fan_out
            out.append((W, b))
        return out

    def output_layer_slice(self) -> slice:
        fan_out, fan_in = self.spec.layer_shapes[-1]
        return slice(self.spec.num_params - fan_out * (fan_in + 1), self.spec.num_params)

    def scale_output_layer(self, factor: float) -> PolicyNet:
        params = self.get_params()
        params[self.output_layer_slice()] *= factor
        return self.with_params(params)

    # -----------------------
    # Evaluation
    # -----------------------

    def _check_inputs(self, X: Array) -> Array:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.input_dim:
            raise DimensionError(
                f"expected inputs of shape (N, {self.spec.input_dim}), got {X.shape}"
            )
        return X

    def _forward_cache(self, X: Array) -> Tuple[Array, List[Tuple[Array, Array]]]:
        act, _ = _ACTIVATIONS[self.spec.activation]
        layers = self.layers()
        cache: List[Tuple[Array, Array]] = []
        h = X
        for idx, (W, b) in enumerate(layers[:-1]):
            z = h @ W.T + b
            a = act(z)
            if self.spec.skip_connections and idx > 0:
                a = a + h
            cache.append((h, z))
            h = a
        W_out, b_out = layers[-1]
        return h @ W_out.T + b_out, cache + [(h, np.empty(0))]

    def forward_batch(self, X: Array) -> Array:
        y, _ = self._forward_cache(self._check_inputs(X))
        return y

    def forward(self, x: Union[Sequence[float], Array]) -> Array:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.spec.input_dim:
            raise DimensionError(
                f"expected an input of length {self.spec.input_dim}, got shape {x.shape}"
            )
        return self.forward_batch(x[None, :])[0]

    __call__ = forward_batch

    def vjp(self, X: Array, upstream: Array) -> ParamVector:
        """
        Gradient w.r.t. params of sum(upstream * forward_batch(X)).
        """
        X = self._check_inputs(X)
        upstream = np.asarray(upstream, dtype=np.float64).reshape(X.shape[0], -1)
        if upstream.shape[1] != self.spec.output_dim:
            raise DimensionError(
                f"upstream has {upstream.shape[1]} columns, net has {self.spec.output_dim} outputs"
            )
        _, dact = _ACTIVATIONS[self.spec.activation]
        _, cache = self._forward_cache(X)
        layers = self.layers()
        grads: List[Tuple[Array, Array]] = [None] * len(layers)  # type: ignore[list-item]

        h_last = cache[-1][0]
        grads[-1] = (upstream.T @ h_last, upstream.sum(axis=0))
        dh = upstream @ layers[-1][0]

        for idx in range(len(layers) - 2, -1, -1):
            h_in, z = cache[idx]
            W, _ = layers[idx]
            dz = dh * dact(z)
            grads[idx] = (dz.T @ h_in, dz.sum(axis=0))
            dh_in = dz @ W
            if self.spec.skip_connections and idx > 0:
                dh_in = dh_in + dh
            dh = dh_in

        return np.concatenate([np.concatenate([gW.ravel(), gb]) for gW, gb in grads])

    def loss_and_grad(self, batch: Batch, loss_kind: LossKind = MSE) -> Tuple[float, ParamVector]:
        kind = _LOSS_ALIASES.get(loss_kind)
        if kind is None:
            raise ValueError(f"unsupported loss_kind {loss_kind!r}")
        if len(batch) == 0:
            raise ValueError("loss_and_grad(): empty batch")
        y = self.forward_batch(batch.inputs)
        if y.shape != batch.targets.shape:
            raise DimensionError(f"targets have shape {batch.targets.shape}, outputs {y.shape}")
        residual = y - batch.targets
        n = residual.shape[0]
        loss = float(np.sum(residual**2) / n)
        return loss, self.vjp(batch.inputs, 2.0 * residual / n)


def _init_params(spec: NetSpec, *, zero_output: bool) -> ParamVector:
    rng = np.random.default_rng(spec.rng_seed)
    chunks: List[Array] = []
    shapes = spec.layer_shapes
    for idx, (fan_out, fan_in) in enumerate(shapes):
        if zero_output and idx == len(shapes) - 1:
            chunks.append(np.zeros(fan_out * fan_in + fan_out))
            continue
        bound = 1.0 / np.sqrt(fan_in)
        chunks.append(rng.uniform(-bound, bound, size=fan_out * fan_in + fan_out))
    return np.concatenate(chunks)


def init_zero_residual(spec: NetSpec) -> PolicyNet:
    return PolicyNet.zero_residual(spec)


def forward(net: PolicyNet, x: Union[Sequence[float], Array]) -> Array:
    return net.forward(x)


def loss_and_grad(
    net: PolicyNet, batch: Batch, loss_kind: LossKind = MSE
) -> Tuple[float, ParamVector]:
    return net.loss_and_grad(batch, loss_kind)
