"""Adam with bias correction, and the validation-loss early stopper."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["AdamState", "Adam", "EarlyStopper"]


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


class Adam:
    """Standard Adam over a named parameter dict, updated in place.

    Only the learning rate is treated as an experiment knob; the moment
    decay rates and epsilon keep their original defaults.
    """

    def __init__(
        self,
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.state = AdamState()

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
        self.state.t += 1
        t = self.state.t
        for name, p in params.items():
            g = grads.get(name)
            if g is None:
                continue
            if g.shape != p.shape:
                raise ValueError(
                    f"gradient shape {g.shape} does not match parameter "
                    f"{name!r} shape {p.shape}"
                )
            m = self.state.m.setdefault(name, np.zeros_like(p))
            v = self.state.v.setdefault(name, np.zeros_like(p))
            m += (1 - self.beta1) * (g - m)
            v += (1 - self.beta2) * (g * g - v)
            m_hat = m / (1 - self.beta1**t)
            v_hat = v / (1 - self.beta2**t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


class EarlyStopper:
    """Stop when validation loss has not improved for ``patience`` epochs.

    Improvement means strictly lower than the best loss seen so far. Epochs
    are numbered from 1; ``best_epoch`` tracks where the minimum occurred.
    """

    def __init__(self, patience: int = 10):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = 0
        self._since_best = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record one epoch's validation loss; True means stop now."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self._since_best = 0
            return False
        self._since_best += 1
        return self._since_best >= self.patience
