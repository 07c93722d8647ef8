"""Dataset manifests, splits, and the synthetic feature generator.

Real histopathology images never ship with the repo; the classifier
consumes precomputed feature containers keyed by record identifier, and the
synthetic generator stands in for a frozen feature extractor at desk scale.
The canonical manifest reproduces the published per-magnification counts of
the BreaKHis corpus so split bookkeeping has a fixed reference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nn.snapshot import load_snapshot, save_snapshot

__all__ = [
    "LABELS",
    "BENIGN_SUBTYPES",
    "MALIGNANT_SUBTYPES",
    "MAGNIFICATIONS",
    "CANONICAL_COUNTS",
    "BreakhisRecord",
    "DatasetManifest",
    "canonical_manifest",
    "save_manifest",
    "load_manifest",
    "split_dataset",
    "generate_synthetic_features",
    "label_index",
    "save_feature_store",
    "load_features",
]

LABELS = ("benign", "malignant")
BENIGN_SUBTYPES = ("A", "F", "PT", "TA")
MALIGNANT_SUBTYPES = ("DC", "LC", "MC", "PC")
MAGNIFICATIONS = (40, 100, 200, 400)

# (benign, malignant) image counts per magnification in BreaKHis.
CANONICAL_COUNTS = {
    40: (625, 1370),
    100: (644, 1437),
    200: (623, 1390),
    400: (588, 1232),
}


@dataclass(frozen=True)
class BreakhisRecord:
    path: str
    magnification: int
    label: str
    subtype: str

    def __post_init__(self):
        if self.magnification not in MAGNIFICATIONS:
            raise ValueError(f"unknown magnification {self.magnification}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        expected = BENIGN_SUBTYPES if self.label == "benign" else MALIGNANT_SUBTYPES
        if self.subtype not in expected:
            raise ValueError(
                f"subtype {self.subtype!r} is not a {self.label} subtype "
                f"(expected one of {expected})"
            )


class DatasetManifest:
    def __init__(self, records: list[BreakhisRecord]):
        self.records = list(records)

    def __len__(self) -> int:
        return len(self.records)

    def subset(self, magnification: int) -> "DatasetManifest":
        return DatasetManifest(
            [r for r in self.records if r.magnification == magnification]
        )

    def counts(self) -> dict[int, tuple[int, int]]:
        """Per-magnification (benign, malignant) record counts."""
        out: dict[int, list[int]] = {}
        for r in self.records:
            pair = out.setdefault(r.magnification, [0, 0])
            pair[0 if r.label == "benign" else 1] += 1
        return {m: (b, mal) for m, (b, mal) in sorted(out.items())}


def canonical_manifest() -> DatasetManifest:
    """Synthetic-identifier manifest with the published BreaKHis counts.

    Subtypes rotate within each (magnification, label) group; only the
    per-magnification label totals are meaningful.
    """
    records = []
    for mag in MAGNIFICATIONS:
        benign_n, malignant_n = CANONICAL_COUNTS[mag]
        for label, n, subtypes in (
            ("benign", benign_n, BENIGN_SUBTYPES),
            ("malignant", malignant_n, MALIGNANT_SUBTYPES),
        ):
            for i in range(n):
                subtype = subtypes[i % len(subtypes)]
                records.append(
                    BreakhisRecord(
                        path=f"{label}/{subtype}/{mag}x/{i:05d}",
                        magnification=mag,
                        label=label,
                        subtype=subtype,
                    )
                )
    return DatasetManifest(records)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "magnification", "label", "subtype"])
        for r in manifest.records:
            writer.writerow([r.path, r.magnification, r.label, r.subtype])


def load_manifest(path: str | Path) -> DatasetManifest:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        records = [
            BreakhisRecord(
                path=row["path"],
                magnification=int(row["magnification"]),
                label=row["label"],
                subtype=row["subtype"],
            )
            for row in reader
        ]
    return DatasetManifest(records)


def split_dataset(
    manifest: DatasetManifest, train_fraction: float, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Seeded random split, drawn independently per magnification subset.

    The training side gets floor(n * train_fraction) records of each
    magnification; everything else lands in test. Record order inside each
    side follows the permutation, which makes the split reproducible from
    the seed alone.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not manifest.records:
        raise ValueError("cannot split an empty manifest")
    rng = np.random.default_rng(seed)
    train: list[BreakhisRecord] = []
    test: list[BreakhisRecord] = []
    mags = sorted({r.magnification for r in manifest.records})
    for mag in mags:
        group = [r for r in manifest.records if r.magnification == mag]
        order = rng.permutation(len(group))
        cut = int(len(group) * train_fraction)
        train.extend(group[i] for i in order[:cut])
        test.extend(group[i] for i in order[cut:])
    return DatasetManifest(train), DatasetManifest(test)


def generate_synthetic_features(
    class_count: int,
    samples_per_class: int,
    feature_shape: tuple[int, ...],
    separation: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian class blobs shaped like frozen backbone feature maps.

    Class k's mean points along channel k, spread evenly over the spatial
    positions and scaled so any two class means sit exactly ``separation``
    apart in the flattened feature space. Unit-variance noise is added on
    top. Returns (features, labels) shuffled together, deterministic in the
    seed.
    """
    if class_count < 2:
        raise ValueError(f"need at least 2 classes, got {class_count}")
    if samples_per_class < 1:
        raise ValueError(f"need at least 1 sample per class, got {samples_per_class}")
    if separation < 0:
        raise ValueError(f"separation must be >= 0, got {separation}")
    channels = feature_shape[-1]
    if class_count > channels:
        raise ValueError(
            f"class count {class_count} exceeds channel count {channels}; "
            f"class means are channel-aligned"
        )
    spatial = 1
    for dim in feature_shape[:-1]:
        spatial *= dim
    rng = np.random.default_rng(seed)
    n = class_count * samples_per_class
    features = rng.standard_normal((n, *feature_shape))
    labels = np.repeat(np.arange(class_count), samples_per_class)
    # Unit direction per class: 1/sqrt(spatial) at channel k everywhere, so
    # ||mean_i - mean_j|| = separation exactly (orthogonal unit directions).
    magnitude = separation / np.sqrt(2.0)
    flat = features.reshape(n, spatial, channels)
    for k in range(class_count):
        flat[labels == k, :, k] += magnitude / np.sqrt(spatial)
    order = rng.permutation(n)
    return features[order], labels[order]


def label_index(label: str) -> int:
    return LABELS.index(label)


# -- feature containers ------------------------------------------------------
#
# Extracted features travel in the same versioned .npz container the model
# snapshots use: one float64 array per record identifier plus a metadata
# entry. A directory of one-array-per-file containers (identifier slashes
# replaced by "__", array stored under "features") is accepted as an
# alternative layout.


def save_feature_store(path: str | Path, features_by_id: dict[str, np.ndarray]) -> None:
    save_snapshot(path, features_by_id, {"kind": "feature-store"})


def _feature_file(directory: Path, identifier: str) -> Path:
    return directory / (identifier.replace("/", "__") + ".npz")


def load_features(path: str | Path, identifiers: list[str]) -> np.ndarray:
    """Stack one feature array per identifier, in the order given."""
    if not identifiers:
        raise ValueError("no identifiers requested")
    p = Path(path)
    arrays = []
    if p.is_dir():
        for ident in identifiers:
            file = _feature_file(p, ident)
            if not file.is_file():
                raise FileNotFoundError(f"no feature file for record {ident!r} under {p}")
            tensors, _ = load_snapshot(file)
            arrays.append(tensors["features"])
    else:
        tensors, _ = load_snapshot(p)
        for ident in identifiers:
            if ident not in tensors:
                raise KeyError(f"feature store {p} has no entry for record {ident!r}")
            arrays.append(tensors[ident])
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"feature arrays disagree on shape: {sorted(shapes)}")
    return np.stack(arrays)
