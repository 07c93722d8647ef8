"""Layers for the classifier heads, with hand-written backward passes.

Every layer keeps the forward cache it needs for backward, so the usage
contract is strictly forward-then-backward per step. Arrays are
channels-last: dense inputs are (batch, features) and spatial inputs are
(batch, height, width, channels). A 1x1 convolution is the Linear layer
applied over the channel axis at each spatial position, which is why no
separate conv type exists.
"""

from __future__ import annotations

import numpy as np

from .activations import (
    AconCParams,
    acon_c_backward,
    acon_c_forward,
    silu_backward,
    silu_forward,
)

__all__ = [
    "Layer",
    "Linear",
    "BatchNorm",
    "AconC",
    "SiLU",
    "GlobalAveragePool",
    "GlobalMaxPool",
    "Dropout",
    "Sequential",
]


class Layer:
    """Common surface: params/grads/buffers dicts plus forward/backward."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Linear(Layer):
    """Dense map over the last axis: y = x @ W + b.

    Leading axes pass through untouched, so the same layer serves both the
    fully-connected head rows and the Conv1x1 rows.
    """

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        scale = np.sqrt(2.0 / (in_dim + out_dim))
        self.params = {
            "W": rng.normal(0.0, scale, size=(in_dim, out_dim)),
            "b": np.zeros(out_dim, dtype=np.float64),
        }
        self._x: np.ndarray | None = None

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.params["W"].shape[0]:
            raise ValueError(
                f"input width {x.shape[-1]} does not match weight input "
                f"dimension {self.params['W'].shape[0]}"
            )
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, upstream):
        x = self._x
        flat_x = x.reshape(-1, x.shape[-1])
        flat_up = upstream.reshape(-1, upstream.shape[-1])
        self.grads = {
            "W": flat_x.T @ flat_up,
            "b": flat_up.sum(axis=0),
        }
        return upstream @ self.params["W"].T


class BatchNorm(Layer):
    """Per-channel batch normalization over all non-channel axes.

    Training normalizes by the biased batch variance and folds the same
    statistics into the running buffers; inference uses the buffers only.
    A training batch needs at least two samples.
    """

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.params = {
            "gamma": np.ones(channels, dtype=np.float64),
            "beta": np.zeros(channels, dtype=np.float64),
        }
        self.buffers = {
            "running_mean": np.zeros(channels, dtype=np.float64),
            "running_var": np.ones(channels, dtype=np.float64),
        }
        self._cache = None

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=np.float64)
        channels = self.params["gamma"].shape[0]
        if x.shape[-1] != channels:
            raise ValueError(f"input has {x.shape[-1]} channels, layer expects {channels}")
        if train:
            if x.shape[0] < 2:
                raise ValueError("batch normalization needs a training batch of size >= 2")
            axes = tuple(range(x.ndim - 1))
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean) * inv_std
            m = self.momentum
            self.buffers["running_mean"] = (1 - m) * self.buffers["running_mean"] + m * mean
            self.buffers["running_var"] = (1 - m) * self.buffers["running_var"] + m * var
            self._cache = (xhat, inv_std, axes)
            return self.params["gamma"] * xhat + self.params["beta"]
        inv_std = 1.0 / np.sqrt(self.buffers["running_var"] + self.eps)
        xhat = (x - self.buffers["running_mean"]) * inv_std
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, upstream):
        if self._cache is None:
            raise RuntimeError("backward before train-mode forward")
        xhat, inv_std, axes = self._cache
        self.grads = {
            "gamma": np.sum(upstream * xhat, axis=axes),
            "beta": np.sum(upstream, axis=axes),
        }
        # Standard batch-norm gradient: remove the batch mean of the upstream
        # and its projection onto xhat before rescaling.
        n = upstream.size // upstream.shape[-1]
        up_mean = upstream.mean(axis=axes)
        proj = np.mean(upstream * xhat, axis=axes)
        return self.params["gamma"] * inv_std * (upstream - up_mean - xhat * proj)


class AconC(Layer):
    """Trainable activation layer over the channel axis."""

    def __init__(self, channels: int):
        super().__init__()
        acon = AconCParams.init(channels)
        self.params = {"p1": acon.p1, "p2": acon.p2, "beta": acon.beta}
        self._x: np.ndarray | None = None

    def _acon(self) -> AconCParams:
        return AconCParams(self.params["p1"], self.params["p2"], self.params["beta"])

    def forward(self, x, train=False):
        self._x = np.asarray(x, dtype=np.float64)
        return acon_c_forward(self._x, self._acon())

    def backward(self, upstream):
        dx, dp1, dp2, dbeta = acon_c_backward(self._x, self._acon(), upstream)
        self.grads = {"p1": dp1, "p2": dp2, "beta": dbeta}
        return dx


class SiLU(Layer):
    def __init__(self):
        super().__init__()
        self._x: np.ndarray | None = None

    def forward(self, x, train=False):
        self._x = np.asarray(x, dtype=np.float64)
        return silu_forward(self._x)

    def backward(self, upstream):
        return silu_backward(self._x, upstream)


class GlobalAveragePool(Layer):
    """(batch, H, W, C) -> (batch, C) spatial mean per channel."""

    def __init__(self):
        super().__init__()
        self._shape: tuple[int, ...] | None = None

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4:
            raise ValueError(f"expected (batch, H, W, C) input, got shape {x.shape}")
        self._shape = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, upstream):
        n, h, w, c = self._shape
        spread = upstream[:, None, None, :] / (h * w)
        return np.broadcast_to(spread, self._shape).copy()


class GlobalMaxPool(Layer):
    """(batch, H, W, C) -> (batch, C) spatial maximum per channel.

    Backward routes each channel's gradient to the first position attaining
    the maximum, which keeps the pass deterministic under ties.
    """

    def __init__(self):
        super().__init__()
        self._cache = None

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4:
            raise ValueError(f"expected (batch, H, W, C) input, got shape {x.shape}")
        n, h, w, c = x.shape
        flat = x.reshape(n, h * w, c)
        idx = flat.argmax(axis=1)
        self._cache = (x.shape, idx)
        return np.take_along_axis(flat, idx[:, None, :], axis=1)[:, 0, :]

    def backward(self, upstream):
        shape, idx = self._cache
        n, h, w, c = shape
        grad = np.zeros((n, h * w, c), dtype=np.float64)
        np.put_along_axis(grad, idx[:, None, :], upstream[:, None, :], axis=1)
        return grad.reshape(shape)


class Dropout(Layer):
    """Inverted dropout; identity outside training."""

    def __init__(self, rate: float, rng: np.random.Generator):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng
        self._mask: np.ndarray | None = None

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=np.float64)
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (self.rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, upstream):
        if self._mask is None:
            return upstream
        return upstream * self._mask


class Sequential:
    """Layer chain with flat, name-qualified parameter access.

    Parameter names look like ``l2_batchnorm.gamma``; the optimizer and the
    snapshot format both key on them, so the names are part of the on-disk
    contract.
    """

    def __init__(self, layers: list[Layer]):
        self.layers = layers
        self._names = [
            f"l{i}_{type(layer).__name__.lower()}" for i, layer in enumerate(layers)
        ]

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            upstream = layer.backward(upstream)
        return upstream

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for name, layer in zip(self._names, self.layers):
            for key, value in layer.params.items():
                out[f"{name}.{key}"] = value
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {}
        for name, layer in zip(self._names, self.layers):
            for key, value in layer.grads.items():
                out[f"{name}.{key}"] = value
        return out

    def set_parameters(self, values: dict[str, np.ndarray]) -> None:
        for name, layer in zip(self._names, self.layers):
            for key in layer.params:
                qualified = f"{name}.{key}"
                if qualified in values:
                    layer.params[key] = np.array(values[qualified], dtype=np.float64)

    def state_dict(self) -> dict[str, np.ndarray]:
        """Trainable parameters plus running buffers, for persistence."""
        out = dict(self.parameters())
        for name, layer in zip(self._names, self.layers):
            for key, value in layer.buffers.items():
                out[f"{name}.{key}"] = value
        return out

    def load_state_dict(self, values: dict[str, np.ndarray]) -> None:
        self.set_parameters(values)
        for name, layer in zip(self._names, self.layers):
            for key in layer.buffers:
                qualified = f"{name}.{key}"
                if qualified in values:
                    layer.buffers[key] = np.array(values[qualified], dtype=np.float64)
