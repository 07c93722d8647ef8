"""Classifier heads over frozen backbone features, training, and metrics.

Five head layouts are supported, differing in pooling, hidden structure,
and the activation between batch norm and pooling. The feature extractor
itself is out of scope: heads consume precomputed (batch, H, W, C) feature
maps, and the backbone is validated structurally through a stage
descriptor rather than executed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .nn.activations import softmax, softmax_cross_entropy
from .nn.layers import (
    AconC,
    BatchNorm,
    Dropout,
    GlobalAveragePool,
    GlobalMaxPool,
    Linear,
    Sequential,
    SiLU,
)
from .nn.optim import Adam, EarlyStopper
from .nn.snapshot import load_snapshot, save_snapshot

__all__ = [
    "HEAD_NAMES",
    "HeadConfig",
    "build_head",
    "StageSpec",
    "BackboneDescriptor",
    "canonical_backbone_descriptor",
    "validate_backbone_descriptor",
    "TrainConfig",
    "TrainReport",
    "train_head",
    "predict",
    "predict_proba",
    "evaluate_accuracy",
    "confusion_matrix",
    "accuracy_from_confusion",
    "per_class_accuracy",
    "TrainedHead",
]

HEAD_NAMES = (
    "VGG-16FC",
    "VGG-16GAP",
    "ResNet-50",
    "EfficientNetV2-S",
    "EfficientNetV2-SA",
)


@dataclass(frozen=True)
class HeadConfig:
    """One head's layout knobs.

    ``conv_width`` is the Conv1x1 output width of the pooling-style heads;
    None keeps the input channel count. ``hidden_dims`` and
    ``dropout_rate`` only matter for the fully-connected head.
    """

    name: str
    input_shape: tuple[int, int, int]
    num_classes: int = 2
    conv_width: int | None = None
    hidden_dims: tuple[int, int] = (1024, 512)
    dropout_rate: float = 0.3

    def __post_init__(self):
        if self.name not in HEAD_NAMES:
            raise ValueError(f"unknown head config {self.name!r}; known: {HEAD_NAMES}")
        if len(self.input_shape) != 3:
            raise ValueError(f"input_shape must be (H, W, C), got {self.input_shape}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")


def build_head(config: HeadConfig, seed: int) -> Sequential:
    """Construct the layer stack for one named config with seeded weights.

    The pooling-style heads share one skeleton (Conv1x1, BN, activation,
    global average pool, classifier); only the activation differs between
    the -S and -SA variants, and the activation draws nothing from the rng,
    so equal seeds give the two variants identical weights.
    """
    rng = np.random.default_rng(seed)
    channels = config.input_shape[-1]
    width = config.conv_width if config.conv_width is not None else channels
    if config.name == "VGG-16FC":
        h1, h2 = config.hidden_dims
        return Sequential(
            [
                GlobalMaxPool(),
                Linear(channels, h1, rng),
                SiLU(),
                Dropout(config.dropout_rate, rng.spawn(1)[0]),
                Linear(h1, h2, rng),
                SiLU(),
                Linear(h2, config.num_classes, rng),
            ]
        )
    activation = AconC(width) if config.name == "EfficientNetV2-SA" else SiLU()
    return Sequential(
        [
            Linear(channels, width, rng),
            BatchNorm(width),
            activation,
            GlobalAveragePool(),
            Linear(width, config.num_classes, rng),
        ]
    )


# -- backbone structure ----------------------------------------------------


@dataclass(frozen=True)
class StageSpec:
    operator: str
    channels: int
    activation: str
    layers: int


@dataclass(frozen=True)
class BackboneDescriptor:
    stages: tuple[StageSpec, ...]


def canonical_backbone_descriptor() -> BackboneDescriptor:
    """The published EfficientNetV2-SA stage table."""
    rows = [
        ("Conv 3x3", 24, "SiLU", 1),
        ("Fused-MBConv1, k3x3", 24, "SiLU", 2),
        ("Fused-MBConv4, k3x3", 48, "SiLU", 4),
        ("Fused-MBConv4, k3x3", 64, "SiLU", 4),
        ("MBConv4, k3x3, SE0.25", 128, "SiLU/Sigmoid", 6),
        ("MBConv6, k3x3, SE0.25", 160, "SiLU/Sigmoid", 9),
        ("MBConv6, k3x3, SE0.25", 272, "SiLU/Sigmoid", 15),
        ("Conv 1x1, BN", 272, "ACON-C", 1),
        ("Pooling", 1792, "", 1),
        ("Dense", 1792, "", 1),
    ]
    return BackboneDescriptor(
        stages=tuple(StageSpec(*row) for row in rows)
    )


_EXPECTED_CHANNELS = (24, 24, 48, 64, 128, 160, 272)
_EXPECTED_LAYERS = (1, 2, 4, 4, 6, 9, 15)


def validate_backbone_descriptor(desc: BackboneDescriptor) -> list[str]:
    """Check stages 0-6 channels/layer counts and the stage-7 activation.

    Returns a list of human-readable mismatch messages; an empty list means
    the descriptor matches the canonical feature-extractor structure.
    """
    mismatches: list[str] = []
    if len(desc.stages) < 8:
        mismatches.append(f"descriptor has {len(desc.stages)} stages, expected at least 8")
        return mismatches
    for i in range(7):
        stage = desc.stages[i]
        if stage.channels != _EXPECTED_CHANNELS[i]:
            mismatches.append(
                f"stage {i}: channels {stage.channels}, expected {_EXPECTED_CHANNELS[i]}"
            )
        if stage.layers != _EXPECTED_LAYERS[i]:
            mismatches.append(
                f"stage {i}: layer count {stage.layers}, expected {_EXPECTED_LAYERS[i]}"
            )
    stage7 = desc.stages[7]
    if stage7.activation != "ACON-C":
        mismatches.append(
            f"stage 7: activation {stage7.activation!r}, expected 'ACON-C' "
            f"(SiLU there is the fixed-activation variant)"
        )
    return mismatches


# -- training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 10


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0


def _epoch_metrics(model: Sequential, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    logits = model.forward(x, train=False)
    loss, _ = softmax_cross_entropy(logits, y)
    acc = float(np.mean(np.argmax(logits, axis=1) == y))
    return loss, acc


def train_head(
    model: Sequential,
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    config: TrainConfig,
    seed: int,
) -> TrainReport:
    """Mini-batch Adam with per-epoch seeded shuffling and early stopping.

    Validation loss is monitored each epoch; when it stops improving for
    ``patience`` epochs training halts and the best-epoch state (weights
    and batch-norm buffers) is restored into the model. Two calls with the
    same seed, model init, and data produce bitwise-identical parameters.
    """
    if train_x.shape[0] != train_y.shape[0]:
        raise ValueError("train features and labels disagree on sample count")
    if val_x.shape[0] != val_y.shape[0]:
        raise ValueError("validation features and labels disagree on sample count")
    report = TrainReport()
    if config.max_epochs == 0:
        return report
    rng = np.random.default_rng(seed)
    optimizer = Adam(lr=config.lr)
    stopper = EarlyStopper(patience=config.patience)
    best_state: dict[str, np.ndarray] | None = None
    n = train_x.shape[0]
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            if batch.size < 2:
                continue  # batch norm cannot train on a single sample
            logits = model.forward(train_x[batch], train=True)
            loss, dlogits = softmax_cross_entropy(logits, train_y[batch])
            if not np.isfinite(loss):
                raise FloatingPointError(f"training diverged at epoch {epoch}: loss={loss}")
            model.backward(dlogits)
            optimizer.step(model.parameters(), model.gradients())
        tr_loss, tr_acc = _epoch_metrics(model, train_x, train_y)
        va_loss, va_acc = _epoch_metrics(model, val_x, val_y)
        report.train_loss.append(tr_loss)
        report.train_acc.append(tr_acc)
        report.val_loss.append(va_loss)
        report.val_acc.append(va_acc)
        improved = va_loss < stopper.best_loss
        should_stop = stopper.update(epoch, va_loss)
        if improved:
            best_state = {k: v.copy() for k, v in model.state_dict().items()}
        report.stopped_epoch = epoch
        if should_stop:
            break
    report.best_epoch = stopper.best_epoch
    if best_state is not None:
        model.load_state_dict(best_state)
    return report


# -- evaluation --------------------------------------------------------------


def predict(model: Sequential, features: np.ndarray) -> np.ndarray:
    logits = model.forward(features, train=False)
    return np.argmax(logits, axis=1)


def predict_proba(model: Sequential, features: np.ndarray) -> np.ndarray:
    return softmax(model.forward(features, train=False))


def evaluate_accuracy(model: Sequential, features: np.ndarray, labels: np.ndarray) -> float:
    """Share of correct argmax predictions; the trace/total identity over
    the confusion matrix is asserted by the test suite rather than here."""
    if features.shape[0] == 0:
        raise ValueError("cannot evaluate on an empty test set")
    return float(np.mean(predict(model, features) == labels))


def confusion_matrix(predictions: np.ndarray, labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    conf = np.zeros((num_classes, num_classes), dtype=np.int64)
    for true, pred in zip(labels, predictions):
        conf[true, pred] += 1
    return conf


def accuracy_from_confusion(conf: np.ndarray) -> float:
    total = conf.sum()
    if total == 0:
        raise ValueError("confusion matrix is empty")
    return float(np.trace(conf) / total)


def per_class_accuracy(
    predictions: np.ndarray, labels: np.ndarray, class_names: tuple[str, ...]
) -> dict[str, float | None]:
    """Accuracy within each class; classes absent from ``labels`` map to None."""
    out: dict[str, float | None] = {}
    for idx, name in enumerate(class_names):
        mask = labels == idx
        if not mask.any():
            out[name] = None
        else:
            out[name] = float(np.mean(predictions[mask] == idx))
    return out


# -- persistence wrapper -------------------------------------------------------


@dataclass
class TrainedHead:
    """A head plus everything needed to serve it: config, classes, weights."""

    model: Sequential
    config: HeadConfig
    class_names: tuple[str, ...]
    seed: int
    meta: dict = field(default_factory=dict)

    def save(self, path) -> None:
        meta = dict(self.meta)
        meta.update(
            {
                "kind": "trained-head",
                "config": asdict(self.config),
                "class_names": list(self.class_names),
                "seed": self.seed,
            }
        )
        save_snapshot(path, self.model.state_dict(), meta)

    @classmethod
    def load(cls, path) -> "TrainedHead":
        tensors, meta = load_snapshot(path)
        if meta.get("kind") != "trained-head":
            raise ValueError(f"{path} is not a trained-head snapshot")
        raw = meta["config"]
        config = HeadConfig(
            name=raw["name"],
            input_shape=tuple(raw["input_shape"]),
            num_classes=raw["num_classes"],
            conv_width=raw.get("conv_width"),
            hidden_dims=tuple(raw.get("hidden_dims", (1024, 512))),
            dropout_rate=raw.get("dropout_rate", 0.3),
        )
        seed = meta.get("seed", 0)
        model = build_head(config, seed)
        model.load_state_dict(tensors)
        extra = {
            k: v
            for k, v in meta.items()
            if k not in ("kind", "config", "class_names", "seed", "snapshot_version")
        }
        return cls(
            model=model,
            config=config,
            class_names=tuple(meta["class_names"]),
            seed=seed,
            meta=extra,
        )
