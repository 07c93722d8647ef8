"""Build a synthetic stand-in dataset: manifest CSV plus feature store.

Real histopathology images and a pretrained feature extractor are not part
of this repository, so experiments run on Gaussian class blobs shaped like
frozen backbone feature maps. Class separation is the difficulty knob:
10 is easily separable, 0 is unlearnable by construction.

Usage:
    python3 scripts/make_synthetic_dataset.py --out-dir runs/synthetic \
        --per-class 200 --separation 6.0
"""

import argparse
from pathlib import Path

from prediag.datasets import (
    BENIGN_SUBTYPES,
    MAGNIFICATIONS,
    MALIGNANT_SUBTYPES,
    BreakhisRecord,
    DatasetManifest,
    generate_synthetic_features,
    save_feature_store,
    save_manifest,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--per-class", type=int, default=200,
                        help="samples per class per magnification")
    parser.add_argument("--separation", type=float, default=6.0)
    parser.add_argument("--height", type=int, default=2)
    parser.add_argument("--width", type=int, default=2)
    parser.add_argument("--channels", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    shape = (args.height, args.width, args.channels)

    records = []
    features = {}
    for mag_index, mag in enumerate(MAGNIFICATIONS):
        x, y = generate_synthetic_features(
            2, args.per_class, shape, args.separation, seed=args.seed + mag_index
        )
        counters = [0, 0]
        for i in range(len(x)):
            label = "benign" if y[i] == 0 else "malignant"
            subtypes = BENIGN_SUBTYPES if y[i] == 0 else MALIGNANT_SUBTYPES
            subtype = subtypes[counters[y[i]] % len(subtypes)]
            path = f"{label}/{subtype}/{mag}x/{counters[y[i]]:05d}"
            counters[y[i]] += 1
            records.append(
                BreakhisRecord(path=path, magnification=mag, label=label, subtype=subtype)
            )
            features[path] = x[i]

    manifest_path = args.out_dir / "manifest.csv"
    features_path = args.out_dir / "features.npz"
    save_manifest(DatasetManifest(records), manifest_path)
    save_feature_store(features_path, features)
    print(f"{len(records)} records over {len(MAGNIFICATIONS)} magnifications")
    print(f"manifest -> {manifest_path}")
    print(f"features -> {features_path} (shape {shape}, separation {args.separation})")


if __name__ == "__main__":
    main()
