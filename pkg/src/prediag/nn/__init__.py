"""Minimal float64 neural-network core used by the classifier heads."""

from .activations import (
    AconCParams,
    acon_c_backward,
    acon_c_forward,
    silu_backward,
    silu_forward,
    softmax,
    softmax_cross_entropy,
)
from .gradcheck import numeric_grad_check
from .layers import (
    AconC,
    BatchNorm,
    Dropout,
    GlobalAveragePool,
    GlobalMaxPool,
    Layer,
    Linear,
    Sequential,
    SiLU,
)
from .optim import Adam, AdamState, EarlyStopper
from .snapshot import SNAPSHOT_VERSION, SnapshotError, load_snapshot, save_snapshot

__all__ = [
    "AconCParams",
    "acon_c_forward",
    "acon_c_backward",
    "silu_forward",
    "silu_backward",
    "softmax",
    "softmax_cross_entropy",
    "numeric_grad_check",
    "Layer",
    "Linear",
    "BatchNorm",
    "AconC",
    "SiLU",
    "GlobalAveragePool",
    "GlobalMaxPool",
    "Dropout",
    "Sequential",
    "Adam",
    "AdamState",
    "EarlyStopper",
    "SNAPSHOT_VERSION",
    "SnapshotError",
    "save_snapshot",
    "load_snapshot",
]
