"""Acceptance gate: the headline guarantees of the whole package.

Each test covers one guarantee end to end and prints a single
``[PASS]``/``[FAIL]`` line (visible under ``pytest -s``). The suite uses
only the chatbot fixtures under ``data/`` and synthetic features; nothing
here depends on external datasets, pretrained weights, or the web UI.
"""

import io
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from prediag.datasets import (
    canonical_manifest,
    generate_synthetic_features,
    split_dataset,
)
from prediag.dialogue import (
    DialogueManager,
    DialogueOutcome,
    compute_gcr,
    default_rules,
    run_gcr_harness,
)
from prediag.heads import (
    BackboneDescriptor,
    HeadConfig,
    StageSpec,
    TrainConfig,
    TrainedHead,
    accuracy_from_confusion,
    build_head,
    canonical_backbone_descriptor,
    confusion_matrix,
    evaluate_accuracy,
    train_head,
    validate_backbone_descriptor,
)
from prediag.matching import levenshtein_distance, similarity
from prediag.nn.activations import (
    AconCParams,
    acon_c_forward,
    silu_forward,
    softmax_cross_entropy,
)
from prediag.nn.gradcheck import numeric_grad_check
from prediag.nn.layers import AconC, BatchNorm, Linear
from prediag.nn.snapshot import save_snapshot
from prediag.service import API_PREFIX, create_app
from prediag.store import KnowledgeGraph
from prediag.textprep import preprocess

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_text_pipeline_golden_output():
    processed = preprocess("Google, is. the best searching engine in the World")
    stages = (
        " ".join(processed.normalized_tokens),
        " ".join(processed.content_tokens),
        " ".join(processed.content_stems),
        processed.bigram_pair_string,
    )
    expected = (
        "google is the best searching engine in the world",
        "google best searching engine world",
        "oogl es earchin ngin orl",
        "oogles esearchin earchinngin nginorl",
    )
    ok = stages == expected
    _verdict(
        "text pipeline golden output",
        ok,
        "all four stages byte-exact" if ok else f"got {stages!r}",
    )


def test_edit_distance_matches_recursive_oracle():
    @lru_cache(maxsize=None)
    def oracle(a: str, b: str) -> int:
        if not a:
            return len(b)
        if not b:
            return len(a)
        cost = 0 if a[-1] == b[-1] else 1
        return min(
            oracle(a[:-1], b) + 1,
            oracle(a, b[:-1]) + 1,
            oracle(a[:-1], b[:-1]) + cost,
        )

    rng = np.random.default_rng(20240817)
    alphabet = "abcd"
    started = time.perf_counter()
    worst_gap = 0.0
    distance_mismatches = 0
    for _ in range(1000):
        a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 9)))
        b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 9)))
        expected = oracle(a, b)
        if levenshtein_distance(a, b) != expected:
            distance_mismatches += 1
        longest = max(len(a), len(b))
        expected_sim = 1.0 if longest == 0 else 1.0 - expected / longest
        worst_gap = max(worst_gap, abs(similarity(a, b) - expected_sim))
    elapsed = time.perf_counter() - started
    ok = distance_mismatches == 0 and worst_gap <= 1e-12 and elapsed < 10.0
    _verdict(
        "edit distance vs recursive oracle",
        ok,
        f"1000 pairs, {distance_mismatches} distance mismatches, "
        f"similarity gap {worst_gap:.2e}, {elapsed:.2f}s",
    )


def test_activation_special_cases():
    x = np.arange(-10.0, 10.0 + 1e-9, 0.01).reshape(-1, 1)
    silu_gap = float(
        np.max(np.abs(acon_c_forward(x, AconCParams.init(1)) - silu_forward(x)))
    )

    grid = x[np.abs(x[:, 0]) >= 0.1].reshape(-1, 1)
    maxout_gap = 0.0
    for p1, p2 in ((1.0, 0.0), (1.3, -0.4), (0.25, -1.0)):
        params = AconCParams(
            p1=np.array([p1]), p2=np.array([p2]), beta=np.array([1e4])
        )
        out = acon_c_forward(grid, params)
        maxout_gap = max(
            maxout_gap, float(np.max(np.abs(out - np.maximum(p1 * grid, p2 * grid))))
        )
    ok = silu_gap < 1e-12 and maxout_gap < 1e-3
    _verdict(
        "activation special cases",
        ok,
        f"x*sigmoid(x) gap {silu_gap:.2e} over 2001 points, "
        f"large-beta maxout gap {maxout_gap:.2e}",
    )


def test_gradient_suite_all_layers():
    def acon_case(rng):
        layer = AconC(3)
        layer.params["p1"] = rng.normal(1.0, 0.3, size=3)
        layer.params["p2"] = rng.normal(0.0, 0.3, size=3)
        layer.params["beta"] = rng.normal(1.0, 0.3, size=3)
        x0 = rng.normal(size=(4, 3))
        probe = rng.normal(size=(4, 3))

        def fn(x):
            out = layer.forward(x, train=True)
            return float(np.sum(out * probe)), layer.backward(probe)

        return fn, x0

    def linear_case(rng):
        layer = Linear(4, 3, rng)
        x = rng.normal(size=(5, 4))
        probe = rng.normal(size=(5, 3))

        def fn(w):
            layer.params["W"] = w
            out = layer.forward(x, train=True)
            layer.backward(probe)
            return float(np.sum(out * probe)), layer.grads["W"].copy()

        return fn, layer.params["W"].copy()

    def batchnorm_case(rng):
        layer = BatchNorm(3)
        x0 = rng.normal(size=(6, 3))
        probe = rng.normal(size=(6, 3))

        def fn(x):
            out = layer.forward(x, train=True)
            return float(np.sum(out * probe)), layer.backward(probe)

        return fn, x0

    def cross_entropy_case(rng):
        labels = rng.integers(0, 3, size=5)
        logits = rng.normal(size=(5, 3))

        def fn(z):
            loss, grad = softmax_cross_entropy(z, labels)
            return float(loss), grad

        return fn, logits

    cases = {
        "trainable activation": acon_case,
        "linear/conv1x1": linear_case,
        "batch norm": batchnorm_case,
        "softmax cross-entropy": cross_entropy_case,
    }
    worst = {}
    for name, case in cases.items():
        errors = []
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            fn, point = case(rng)
            errors.append(numeric_grad_check(fn, point))
        worst[name] = max(errors)

    def doubled(x):
        return float(np.sum(x * x)), 4.0 * x

    fault_error = numeric_grad_check(doubled, np.random.default_rng(0).normal(size=5) + 2.0)

    ok = all(err < 1e-5 for err in worst.values()) and fault_error > 0.4
    detail = ", ".join(f"{name} {err:.1e}" for name, err in worst.items())
    _verdict(
        "gradient suite",
        ok,
        f"20 points/layer, worst rel errors: {detail}; "
        f"planted doubled gradient flagged at {fault_error:.2f}",
    )


def test_head_training_reaches_target_and_repeats_bitwise():
    shape = (2, 2, 16)
    train_x, train_y = generate_synthetic_features(2, 32, shape, 10.0, seed=21)
    val_x, val_y = generate_synthetic_features(2, 8, shape, 10.0, seed=22)
    config = TrainConfig(lr=0.001, batch_size=16, max_epochs=200, patience=200)

    started = time.perf_counter()
    states = []
    accuracies = []
    for _ in range(2):
        model = build_head(
            HeadConfig(name="EfficientNetV2-SA", input_shape=shape), seed=5
        )
        train_head(model, train_x, train_y, val_x, val_y, config, seed=5)
        states.append({k: v.copy() for k, v in model.state_dict().items()})
        accuracies.append(evaluate_accuracy(model, train_x, train_y))
    elapsed = time.perf_counter() - started

    bitwise = states[0].keys() == states[1].keys() and all(
        np.array_equal(states[0][k], states[1][k]) for k in states[0]
    )
    ok = accuracies[0] >= 0.95 and bitwise and elapsed < 60.0
    _verdict(
        "trainable-activation head training",
        ok,
        f"64 separation-10 samples, train accuracy {accuracies[0]:.2%}, "
        f"repeat bitwise identical: {bitwise}, both runs took {elapsed:.1f}s",
    )


def test_fixed_and_trainable_activation_heads_agree_at_init():
    shape = (2, 2, 16)
    fixed = build_head(HeadConfig(name="EfficientNetV2-S", input_shape=shape), seed=7)
    trainable = build_head(
        HeadConfig(name="EfficientNetV2-SA", input_shape=shape), seed=7
    )
    shared = all(
        np.array_equal(value, trainable.parameters()[key])
        for key, value in fixed.parameters().items()
        if key in trainable.parameters()
    )
    x = np.random.default_rng(3).normal(size=(16, *shape))
    gap = float(np.max(np.abs(fixed.forward(x) - trainable.forward(x))))
    ok = shared and gap < 1e-12
    _verdict(
        "head variants agree at init",
        ok,
        f"shared weights: {shared}, logit gap {gap:.2e} over 16 samples",
    )


def test_metric_arithmetic():
    rng = np.random.default_rng(99)
    trace_mismatches = 0
    for _ in range(100):
        n = int(rng.integers(1, 200))
        k = int(rng.integers(2, 6))
        labels = rng.integers(0, k, size=n)
        preds = rng.integers(0, k, size=n)
        direct = float(np.mean(preds == labels))
        via_confusion = accuracy_from_confusion(confusion_matrix(preds, labels, k))
        if direct != via_confusion:
            trace_mismatches += 1

    outcomes = [DialogueOutcome(str(i), i < 19) for i in range(30)]
    gcr = compute_gcr(outcomes)

    train, test = split_dataset(canonical_manifest(), 0.7, seed=0)
    totals = {
        mag: len(train.subset(mag)) + len(test.subset(mag))
        for mag in (40, 100, 200, 400)
    }
    expected_totals = {40: 1995, 100: 2081, 200: 2013, 400: 1820}

    ok = trace_mismatches == 0 and gcr == 63.33 and totals == expected_totals
    _verdict(
        "metric arithmetic",
        ok,
        f"100 confusion matrices trace/total exact, 19/30 -> {gcr}%, "
        f"split totals {tuple(totals.values())}",
    )


def test_backbone_descriptor_validation():
    clean = validate_backbone_descriptor(canonical_backbone_descriptor())

    caught = 0
    planted = 0
    base = canonical_backbone_descriptor().stages
    for i in range(7):
        for field, value in (("channels", base[i].channels + 8),
                             ("layers", base[i].layers + 1)):
            stages = list(base)
            stages[i] = StageSpec(
                operator=stages[i].operator,
                channels=value if field == "channels" else stages[i].channels,
                activation=stages[i].activation,
                layers=value if field == "layers" else stages[i].layers,
            )
            planted += 1
            if len(validate_backbone_descriptor(BackboneDescriptor(tuple(stages)))) == 1:
                caught += 1
    stages = list(base)
    stages[7] = StageSpec(stages[7].operator, stages[7].channels, "SiLU", stages[7].layers)
    planted += 1
    if len(validate_backbone_descriptor(BackboneDescriptor(tuple(stages)))) == 1:
        caught += 1

    ok = clean == [] and caught == planted
    _verdict(
        "backbone descriptor validation",
        ok,
        f"canonical table clean, {caught}/{planted} planted mutations reported",
    )


def test_dialogue_harness_end_to_end():
    graph = KnowledgeGraph()
    graph.train_from_files(sorted((DATA_DIR / "corpus").glob("*.txt")))
    manager = DialogueManager(graph)
    report = run_gcr_harness(DATA_DIR / "dialogues", manager)

    fallback_ok = (
        default_rules().fallback_reply == "-I am sorry, but I do not understand"
    )
    mismatched = [r.name for r in report.results if not r.ok]
    ok = (
        len(report.results) == 30
        and not mismatched
        and report.gcr == 63.33
        and fallback_ok
    )
    _verdict(
        "dialogue harness",
        ok,
        f"30 scripts, {len(mismatched)} label mismatches, GCR {report.gcr}%, "
        f"fallback verbatim: {fallback_ok}",
    )


def test_service_contract_round_trips():
    graph = KnowledgeGraph()
    graph.train_from_files(sorted((DATA_DIR / "corpus").glob("*.txt")))

    shape = (2, 2, 8)
    head_config = HeadConfig(name="EfficientNetV2-SA", input_shape=shape)
    model = build_head(head_config, seed=0)
    x, y = generate_synthetic_features(2, 30, shape, 10.0, seed=0)
    train_head(
        model, x[12:], y[12:], x[:12], y[:12], TrainConfig(max_epochs=30), seed=0
    )
    head = TrainedHead(
        model=model, config=head_config, class_names=("benign", "malignant"), seed=0
    )
    client = TestClient(create_app(graph, models={"breast-40x": head}))

    chat = client.post(f"{API_PREFIX}/chat", json={"text": "hello"})
    chat_body = chat.json()
    chat_ok = (
        chat.status_code == 200
        and isinstance(chat_body["session_id"], str)
        and isinstance(chat_body["reply"], str)
        and chat_body["goal_status"] in ("InProgress", "Completed", "Failed")
        and isinstance(chat_body["risk_level"], str)
    )

    buf = io.BytesIO()
    save_snapshot(buf, {"features": x[0]}, {"kind": "feature-store"})
    classify = client.post(
        f"{API_PREFIX}/classify?model_id=breast-40x", content=buf.getvalue()
    )
    body = classify.json()
    confidence_sum = sum(body.get("confidence", []))
    classify_ok = (
        classify.status_code == 200
        and body["label"] in ("benign", "malignant")
        and body["class_names"] == ["benign", "malignant"]
        and abs(confidence_sum - 1.0) <= 1e-9
        and body["model_id"] == "breast-40x"
    )

    ok = chat_ok and classify_ok
    _verdict(
        "service contract",
        ok,
        f"chat schema ok: {chat_ok}, classify schema ok: {classify_ok}, "
        f"confidence sum deviation {abs(confidence_sum - 1.0):.1e}",
    )
