"""Elementwise activations with analytic gradients.

Arrays are channels-last: the trainable per-channel activation parameters
broadcast along the final axis. Everything runs in float64; the gradient
checks in the test suite are too tight for single precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "AconCParams",
    "acon_c_forward",
    "acon_c_backward",
    "silu_forward",
    "silu_backward",
    "softmax",
    "softmax_cross_entropy",
]


@dataclass
class AconCParams:
    """Per-channel p1, p2, beta vectors.

    The default initialization p1=1, p2=0, beta=1 makes the activation
    exactly x*sigmoid(x) at step 0, so an untrained model behaves like its
    fixed-activation counterpart.
    """

    p1: np.ndarray
    p2: np.ndarray
    beta: np.ndarray

    @classmethod
    def init(cls, channels: int) -> "AconCParams":
        if channels < 1:
            raise ValueError(f"channels must be >= 1, got {channels}")
        return cls(
            p1=np.ones(channels, dtype=np.float64),
            p2=np.zeros(channels, dtype=np.float64),
            beta=np.ones(channels, dtype=np.float64),
        )

    def __post_init__(self):
        if not (self.p1.shape == self.p2.shape == self.beta.shape) or self.p1.ndim != 1:
            raise ValueError(
                f"p1/p2/beta must be equal-length vectors, got shapes "
                f"{self.p1.shape}, {self.p2.shape}, {self.beta.shape}"
            )

    @property
    def channels(self) -> int:
        return self.p1.shape[0]


def _check_channels(x: np.ndarray, params: AconCParams) -> None:
    if x.ndim < 1 or x.shape[-1] != params.channels:
        raise ValueError(
            f"input channel axis {x.shape[-1] if x.ndim else 'scalar'} does not match "
            f"{params.channels} activation channels"
        )


def acon_c_forward(x: np.ndarray, params: AconCParams) -> np.ndarray:
    """f(x) = (p1-p2) * x * sigmoid(beta * (p1-p2) * x) + p2 * x, per channel."""
    x = np.asarray(x, dtype=np.float64)
    _check_channels(x, params)
    d = params.p1 - params.p2
    s = expit(params.beta * d * x)
    return d * x * s + params.p2 * x


def acon_c_backward(
    x: np.ndarray, params: AconCParams, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic partials of the ACON forward, contracted against upstream.

    With d = p1-p2 and s = sigmoid(beta*d*x):
        df/dx  = d*s + beta*d^2*x*s*(1-s) + p2
        df/dp1 = x*s + beta*d*x^2*s*(1-s)
        df/dp2 = x - x*s - beta*d*x^2*s*(1-s)
        df/db  = d^2*x^2*s*(1-s)
    Returns (dx, dp1, dp2, dbeta); the parameter gradients are reduced over
    every axis except the channel axis.
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    _check_channels(x, params)
    if upstream.shape != x.shape:
        raise ValueError(f"upstream shape {upstream.shape} does not match input {x.shape}")
    d = params.p1 - params.p2
    s = expit(params.beta * d * x)
    sp = s * (1.0 - s)
    common = params.beta * d * x * x * sp
    dx = upstream * (d * s + params.beta * d * d * x * sp + params.p2)
    reduce_axes = tuple(range(x.ndim - 1))
    dp1 = np.sum(upstream * (x * s + common), axis=reduce_axes)
    dp2 = np.sum(upstream * (x - x * s - common), axis=reduce_axes)
    dbeta = np.sum(upstream * (d * d * x * x * sp), axis=reduce_axes)
    return dx, dp1, dp2, dbeta


def silu_forward(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x * expit(x)


def silu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    s = expit(x)
    return upstream * (s + x * s * (1.0 - s))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; works on 1-d or 2-d input."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean negative log likelihood over the batch and its logit gradient.

    ``logits`` is (N, K), ``labels`` an integer vector of length N. The
    gradient (softmax - one_hot)/N is exact, so the loss+gradient pair can
    feed the finite-difference checker directly.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise ValueError(f"logits must be 2-d (batch, classes), got shape {logits.shape}")
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match batch size {n}")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_z = np.log(np.sum(np.exp(shifted), axis=1))
    log_probs = shifted - log_z[:, None]
    loss = float(-np.mean(log_probs[np.arange(n), labels]))
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, grad
