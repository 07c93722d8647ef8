"""Command-line entry points: training, evaluation, and the HTTP server."""

from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import click
import numpy as np

from .config import AppConfig, load_config
from .datasets import (
    BENIGN_SUBTYPES,
    LABELS,
    MAGNIFICATIONS,
    MALIGNANT_SUBTYPES,
    DatasetManifest,
    label_index,
    load_features,
    load_manifest,
    split_dataset,
)
from .dialogue import DialogueManager, default_rules, load_rules, run_gcr_harness
from .heads import (
    HEAD_NAMES,
    HeadConfig,
    TrainConfig,
    TrainedHead,
    build_head,
    predict,
    train_head,
)
from .store import KnowledgeGraph, load_store, save_store
from .textprep import load_stopwords


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.pass_context
def main(ctx, config_path, seed):
    """Consultation chatbot and pathology-feature classifier toolkit."""
    cfg = load_config(config_path) if config_path else AppConfig()
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    ctx.obj = cfg


def _stopwords(cfg: AppConfig):
    return load_stopwords(cfg.stopwords) if cfg.stopwords else None


def _rules(cfg: AppConfig):
    return load_rules(cfg.rules) if cfg.rules else default_rules()


@main.command("train-chat")
@click.option("--corpus-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def train_chat(cfg: AppConfig, corpus_dir, out_path):
    """Train the statement graph from corpus files and save it."""
    paths = sorted(Path(corpus_dir).glob("*.txt"))
    if not paths:
        raise click.ClickException(f"no corpus files (*.txt) in {corpus_dir}")
    graph = KnowledgeGraph(stopwords=_stopwords(cfg))
    inserted = graph.train_from_files(paths)
    save_store(graph, out_path)
    click.echo(
        f"trained {inserted} statements from {len(paths)} files; "
        f"{len(graph)} distinct statements -> {out_path}"
    )


@main.command("train-classifier")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--features", "features_path", required=True, type=click.Path(exists=True))
@click.option("--head", "head_name", required=True, type=click.Choice(HEAD_NAMES))
@click.option("--magnification", required=True, type=click.Choice([str(m) for m in MAGNIFICATIONS]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--train-fraction", default=0.7, show_default=True)
@click.option("--val-fraction", default=0.15, show_default=True,
              help="Validation share carved out of the training split.")
@click.option("--lr", default=0.001, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--max-epochs", default=200, show_default=True)
@click.option("--patience", default=10, show_default=True)
@click.option("--conv-width", default=None, type=int,
              help="Conv1x1 output width; default keeps the input channel count.")
@click.pass_obj
def train_classifier(cfg: AppConfig, manifest_path, features_path, head_name,
                     magnification, out_path, train_fraction, val_fraction,
                     lr, batch_size, max_epochs, patience, conv_width):
    """Train one head on one magnification subset and save the model."""
    manifest = load_manifest(manifest_path)
    subset = manifest.subset(int(magnification))
    if not subset.records:
        raise click.ClickException(f"manifest has no {magnification}X records")
    train_m, test_m = split_dataset(subset, train_fraction, cfg.seed)
    fit_m, val_m = split_dataset(train_m, 1.0 - val_fraction, cfg.seed + 1)
    if not fit_m.records or not val_m.records:
        raise click.ClickException("training split too small to carve a validation set")

    def xy(m: DatasetManifest):
        x = load_features(features_path, [r.path for r in m.records])
        y = np.array([label_index(r.label) for r in m.records])
        return x, y

    fit_x, fit_y = xy(fit_m)
    val_x, val_y = xy(val_m)
    head_config = HeadConfig(
        name=head_name,
        input_shape=tuple(fit_x.shape[1:]),
        num_classes=len(LABELS),
        conv_width=conv_width,
    )
    model = build_head(head_config, cfg.seed)
    train_config = TrainConfig(lr=lr, batch_size=batch_size,
                               max_epochs=max_epochs, patience=patience)
    report = train_head(model, fit_x, fit_y, val_x, val_y, train_config, cfg.seed)
    trained = TrainedHead(
        model=model,
        config=head_config,
        class_names=LABELS,
        seed=cfg.seed,
        meta={"magnification": int(magnification), "head": head_name},
    )
    trained.save(out_path)
    test_x, test_y = xy(test_m)
    test_preds = predict(model, test_x)
    test_acc = float(np.mean(test_preds == test_y))
    click.echo(
        f"{head_name} @ {magnification}X: stopped at epoch {report.stopped_epoch} "
        f"(best {report.best_epoch}), train acc "
        f"{report.train_acc[-1] if report.train_acc else float('nan'):.4f}, "
        f"test acc {test_acc:.4f} -> {out_path}"
    )


@main.command("eval-classifier")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--features", "features_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def eval_classifier(cfg: AppConfig, model_path, manifest_path, features_path):
    """Evaluate a trained head; prints overall and per-subtype accuracy CSV."""
    trained = TrainedHead.load(model_path)
    manifest = load_manifest(manifest_path)
    magnification = trained.meta.get("magnification")
    if magnification is not None:
        manifest = manifest.subset(int(magnification))
    if not manifest.records:
        raise click.ClickException("no matching records to evaluate")
    x = load_features(features_path, [r.path for r in manifest.records])
    y = np.array([label_index(r.label) for r in manifest.records])
    preds = predict(trained.model, x)
    accuracy = float(np.mean(preds == y))
    click.echo(f"model,magnification,accuracy")
    click.echo(f"{trained.config.name},{magnification},{100.0 * accuracy:.2f}")
    click.echo("subtype,correct,total,accuracy")
    for subtype in BENIGN_SUBTYPES + MALIGNANT_SUBTYPES:
        idx = [i for i, r in enumerate(manifest.records) if r.subtype == subtype]
        if not idx:
            click.echo(f"{subtype},0,0,undefined")
            continue
        correct = int(sum(preds[i] == y[i] for i in idx))
        click.echo(f"{subtype},{correct},{len(idx)},{100.0 * correct / len(idx):.2f}")


@main.command("eval-gcr")
@click.option("--scripts", "script_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--store", "store_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def eval_gcr(cfg: AppConfig, script_dir, store_path):
    """Replay scripted dialogues and report the goal completion rate."""
    graph = load_store(store_path)
    manager = DialogueManager(
        graph,
        rules=_rules(cfg),
        threshold=cfg.similarity_threshold,
        selection_policy=cfg.selection_policy,
    )
    report = run_gcr_harness(script_dir, manager)
    mismatches = 0
    for result in report.results:
        status = "ok" if result.ok else "MISMATCH"
        if not result.ok:
            mismatches += 1
        click.echo(f"{result.name}: expected {result.expected}, got {result.actual} [{status}]")
    click.echo(f"GCR: {report.gcr:.2f}% over {len(report.results)} dialogues")
    if mismatches:
        click.echo(f"{mismatches} dialogues deviated from their expected labels", err=True)
        sys.exit(1)


@main.command("serve")
@click.option("--store", "store_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model-dir", default=None, type=click.Path(file_okay=False))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.pass_obj
def serve(cfg: AppConfig, store_path, model_dir, host, port):
    """Run the HTTP service over a trained store and model directory."""
    import uvicorn

    from .service import create_app

    graph = load_store(store_path)
    models = {}
    model_dir = model_dir or cfg.model_dir
    if model_dir:
        for path in sorted(Path(model_dir).glob("*.npz")):
            models[path.stem] = TrainedHead.load(path)
    app = create_app(
        graph,
        models=models,
        rules=_rules(cfg),
        threshold=cfg.similarity_threshold,
        session_ttl=cfg.session_ttl_seconds,
        selection_policy=cfg.selection_policy,
    )
    click.echo(f"serving {len(graph)} statements and {len(models)} models")
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port)


if __name__ == "__main__":
    main()
