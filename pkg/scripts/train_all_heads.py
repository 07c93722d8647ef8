"""Train every classifier head on one magnification and compare accuracies.

Reproduces the head-comparison experiment shape on synthetic features:
all five heads see the same split and the same budget; the table at the
end lists test accuracy and parameter count per head. With separable
synthetic data every head should land near 100%, the point being the
relative parameter cost rather than the ranking.

Usage:
    python3 scripts/make_synthetic_dataset.py --out-dir runs/synthetic
    python3 scripts/train_all_heads.py --data-dir runs/synthetic --magnification 40
"""

import argparse
import time
from pathlib import Path

import numpy as np

from prediag.datasets import label_index, load_features, load_manifest, split_dataset
from prediag.heads import (
    HEAD_NAMES,
    HeadConfig,
    TrainConfig,
    build_head,
    evaluate_accuracy,
    train_head,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", type=Path, required=True,
                        help="directory holding manifest.csv and features.npz")
    parser.add_argument("--magnification", type=int, default=40)
    parser.add_argument("--max-epochs", type=int, default=100)
    parser.add_argument("--patience", type=int, default=10)
    parser.add_argument("--conv-width", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    manifest = load_manifest(args.data_dir / "manifest.csv").subset(args.magnification)
    if not manifest.records:
        raise SystemExit(f"no {args.magnification}X records in the manifest")
    train_m, test_m = split_dataset(manifest, 0.7, args.seed)
    fit_m, val_m = split_dataset(train_m, 0.85, args.seed + 1)

    def xy(m):
        x = load_features(args.data_dir / "features.npz", [r.path for r in m.records])
        return x, np.array([label_index(r.label) for r in m.records])

    fit_x, fit_y = xy(fit_m)
    val_x, val_y = xy(val_m)
    test_x, test_y = xy(test_m)
    print(
        f"{args.magnification}X: {len(fit_y)} train / {len(val_y)} val / "
        f"{len(test_y)} test, feature shape {fit_x.shape[1:]}"
    )

    train_config = TrainConfig(max_epochs=args.max_epochs, patience=args.patience)
    rows = []
    for name in HEAD_NAMES:
        config = HeadConfig(
            name=name, input_shape=tuple(fit_x.shape[1:]), conv_width=args.conv_width
        )
        model = build_head(config, args.seed)
        started = time.perf_counter()
        report = train_head(model, fit_x, fit_y, val_x, val_y, train_config, args.seed)
        elapsed = time.perf_counter() - started
        accuracy = evaluate_accuracy(model, test_x, test_y)
        n_params = sum(v.size for v in model.parameters().values())
        rows.append((name, accuracy, n_params, report.stopped_epoch, elapsed))

    print(f"\n{'head':<20} {'test acc':>9} {'params':>9} {'epochs':>7} {'time':>7}")
    for name, accuracy, n_params, epochs, elapsed in rows:
        print(f"{name:<20} {accuracy:>8.2%} {n_params:>9,} {epochs:>7} {elapsed:>6.1f}s")


if __name__ == "__main__":
    main()
