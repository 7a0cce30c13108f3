"""Acceptance gate: one criterion per test, one printed PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
happen; without -s they appear in captured output on failure.
"""

import hashlib
import itertools
import json
import time
from pathlib import Path

import numpy as np

from kfid.classifier import (
    KIND_LINEAR,
    KIND_ONE_HIDDEN,
    init_head,
    load_head,
    loss_and_gradient,
    save_head,
)
from kfid.cli import main
from kfid.distance import AnchorSet, fuse_dataset
from kfid.ensemble import majority_vote
from kfid.features import FeatureMatrix, load_features, save_features
from kfid.metrics import (
    ConfusionCounts,
    aggregate_report,
    load_reference_scores,
    precision_recall_f,
)
from kfid.dataset import Split, average_memory_size, load_reference_manifest
from kfid.rng import PortableRng

# Pinned once from the seeded golden pipeline; regression constants thereafter.
GOLDEN_REPORT_SHA256 = (
    "6fc8e57ac5a7f4bb3a7bb41de10607188d1d312a536e966fb274a411aad3042b"
)
GOLDEN_ENSEMBLE_F = 100.0

PUBLISHED_AVERAGES = {
    ("baseline", "ResNet-50"): 59.11,
    ("baseline", "ResNet-101"): 58.11,
    ("baseline", "Inception-V4"): 56.93,
    ("baseline", "Xception"): 55.93,
    ("baseline", "ViT"): 58.88,
    ("fusion", "ResNet-50"): 61.03,
    ("fusion", "ResNet-101"): 60.54,
    ("fusion", "Inception-V4"): 61.33,
    ("fusion", "Xception"): 57.40,
    ("fusion", "ViT"): 59.43,
    ("ensemble", "Majority-Vote"): 62.97,
}


def check(tag, ok, detail):
    line = f"{tag}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def test_a1_replayed_table_arithmetic():
    start = time.monotonic()
    report = aggregate_report(load_reference_scores())
    averages = {(m.group, m.name): m.average for m in report.models}
    worst = 0.0
    for key, published in PUBLISHED_AVERAGES.items():
        worst = max(worst, abs(averages[key] - published))
    delta_errors = (
        abs(report.deltas["ensemble_vs_baseline"] - 5.178),
        abs(report.deltas["ensemble_vs_fusion"] - 3.024),
    )
    elapsed = time.monotonic() - start
    ok = (
        len(averages) == 11
        and worst <= 0.005
        and max(delta_errors) <= 0.001
        and elapsed < 1.0
    )
    check(
        "A1 replayed table arithmetic",
        ok,
        f"avg err {worst:.4f}, delta err {max(delta_errors):.5f}, {elapsed:.3f}s",
    )


def test_a2_absolute_scores_out_of_scope():
    # The bundled per-video values come from a corpus that is not distributable
    # and from backbone training that is out of scope here, so they can only be
    # replayed, never regenerated. The README states this and the report keeps
    # published and recomputed averages apart rather than blending them.
    readme = Path(__file__).resolve().parent.parent / "README.md"
    text = " ".join(
        readme.read_text(encoding="utf-8").split() if readme.exists() else []
    )
    documented = "cannot be regenerated" in text and "private" in text
    report = aggregate_report(load_reference_scores())
    xception = next(
        m for m in report.models if m.group == "baseline" and m.name == "Xception"
    )
    separated = (
        xception.published_average == 55.93
        and abs(xception.recomputed_average - 56.80) < 0.005
        and any("Xception" in note for note in report.notes)
    )
    check(
        "A2 absolute F-scores documented as non-reproducible",
        documented and separated,
        f"readme documented={documented}, published/recomputed kept apart={separated}",
    )


def test_a3_fusion_distance_oracle():
    start = time.monotonic()
    rng = PortableRng(3001)
    cases = 0
    worst = 0.0
    for _ in range(500):
        n = 1 + rng.next_below(20)
        d = 1 + rng.next_below(8)
        k = 1 + rng.next_below(5)
        data = np.array([[rng.next_gaussian() for _ in range(d)] for _ in range(n)])
        anchors = np.array(
            [[rng.next_gaussian() for _ in range(d)] for _ in range(k)]
        )
        matrix = FeatureMatrix.from_rows("v", data)
        anchor_set = AnchorSet(
            anchors, tuple(f"a/{i:06d}" for i in range(k)), 0, k
        )
        fused = fuse_dataset(matrix, anchor_set).data
        expected = np.zeros((n, 2 * d))
        for i in range(n):
            for c in range(d):
                expected[i, c] = data[i, c]
                total = 0.0
                for j in range(k):
                    total += abs(data[i, c] - anchors[j, c])
                expected[i, d + c] = total / k
        err = np.max(
            np.abs(fused - expected) / np.maximum(np.abs(expected), 1e-15)
        )
        worst = max(worst, float(err))
        cases += 1
    elapsed = time.monotonic() - start
    ok = cases >= 500 and worst <= 1e-12 and elapsed < 5.0
    check(
        "A3 fusion distance vs naive oracle",
        ok,
        f"{cases} cases, worst rel err {worst:.2e}, {elapsed:.3f}s",
    )


def test_a4_gradient_check():
    start = time.monotonic()
    rng = PortableRng(4001)
    epsilon = 1e-5
    cases = 0
    worst = 0.0
    for case in range(100):
        kind = KIND_LINEAR if case % 2 == 0 else KIND_ONE_HIDDEN
        dim = 1 + rng.next_below(5)
        n = 1 + rng.next_below(6)
        hidden = 1 + rng.next_below(3)
        head = init_head(kind, dim, PortableRng(7000 + case), hidden)
        x = np.array([[rng.next_gaussian() for _ in range(dim)] for _ in range(n)])
        y = np.array([float(rng.next_below(2)) for _ in range(n)])
        _, grads = loss_and_gradient(head, x, y)
        grad_w, grad_b = grads
        analytic = np.concatenate(
            [np.asarray(g, dtype=np.float64).ravel() for pair in zip(grad_w, grad_b) for g in pair]
        )
        base = head.to_vector()
        for i in range(base.size):
            plus = base.copy()
            plus[i] += epsilon
            minus = base.copy()
            minus[i] -= epsilon
            lp, _ = loss_and_gradient(head.with_vector(plus), x, y)
            lm, _ = loss_and_gradient(head.with_vector(minus), x, y)
            numeric = (lp - lm) / (2.0 * epsilon)
            rel = abs(analytic[i] - numeric) / max(
                abs(analytic[i]), abs(numeric), 1e-5
            )
            worst = max(worst, rel)
        cases += 1
    elapsed = time.monotonic() - start
    ok = cases >= 100 and worst < 1e-4 and elapsed < 10.0
    check(
        "A4 analytic gradient vs central differences",
        ok,
        f"{cases} cases, worst rel err {worst:.2e}, {elapsed:.3f}s",
    )


def run_golden_pipeline(root):
    data = root / "data"
    heads = root / "heads"
    report = root / "report.txt"
    steps = [
        ["gen-synthetic", "--out", str(data), "--dim", "16", "--separation", "8",
         "--train-key", "50", "--train-ordinary", "50", "--test-key", "25",
         "--test-ordinary", "25", "--seed", "7"],
        ["fuse", "--features", str(data / "train.kff"),
         "--labels", str(data / "train_labels.csv"), "--k", "32", "--seed", "7",
         "--out", str(data / "train_fused.kff"),
         "--save-anchors", str(data / "anchors.kff")],
        ["fuse", "--features", str(data / "test.kff"),
         "--anchors", str(data / "anchors.kff"),
         "--out", str(data / "test_fused.kff")],
        ["train", "--features", str(data / "train_fused.kff"),
         "--labels", str(data / "train_labels.csv"), "--out-dir", str(heads),
         "--members", "5", "--seed", "7", "--learning-rate", "0.01",
         "--epochs", "150", "--batch-size", "16"],
        ["evaluate", "--video", "test", str(data / "test_fused.kff"),
         str(data / "test_labels.csv"), "--heads", str(heads),
         "--out", str(report)],
    ]
    for step in steps:
        assert main(step) == 0, f"pipeline step failed: {step[0]}"
    json_text = (root / "report.json")
    assert main(
        ["evaluate", "--video", "test", str(data / "test_fused.kff"),
         str(data / "test_labels.csv"), "--heads", str(heads),
         "--format", "json", "--out", str(json_text)]
    ) == 0
    return report.read_bytes(), json.loads(json_text.read_text())


def test_a5_golden_end_to_end(tmp_path, capsys):
    start = time.monotonic()
    first, payload = run_golden_pipeline(tmp_path / "run1")
    second, _ = run_golden_pipeline(tmp_path / "run2")
    capsys.readouterr()  # the pipeline's own stdout is not part of this check
    elapsed = time.monotonic() - start
    digest = hashlib.sha256(first).hexdigest()
    ensemble_f = next(
        m for m in payload["models"] if m["group"] == "ensemble"
    )["videos"]["test"]["f"]
    ok = (
        first == second
        and digest == GOLDEN_REPORT_SHA256
        and ensemble_f == GOLDEN_ENSEMBLE_F
        and ensemble_f >= 90.0
        and elapsed < 30.0
    )
    check(
        "A5 golden end-to-end pipeline",
        ok,
        f"bit-identical={first == second}, F={ensemble_f:.2f}, {elapsed:.3f}s",
    )


def test_a6_vote_oracle():
    start = time.monotonic()
    checked = 0
    ok = True
    for members in range(1, 8):
        for pattern in itertools.product((0, 1), repeat=members):
            ones = sum(pattern)
            zeros = members - ones
            expected = 0 if zeros > ones else 1
            got = majority_vote([[v] for v in pattern])
            ok = ok and got == [expected]
            checked += 1
    elapsed = time.monotonic() - start
    ok = ok and checked == sum(2**m for m in range(1, 8)) and elapsed < 1.0
    check("A6 majority vote vs popcount oracle", ok, f"{checked} patterns, {elapsed:.3f}s")


def test_a7_metric_oracle():
    start = time.monotonic()
    checked = 0
    worst = 0.0
    for tp, fp, fn, tn in itertools.product(range(5), repeat=4):
        p, r, f = precision_recall_f(ConfusionCounts(tp, fp, fn, tn))
        expected_p = tp / (tp + fp) if tp + fp else 0.0
        expected_r = tp / (tp + fn) if tp + fn else 0.0
        expected_f = (
            2 * expected_p * expected_r / (expected_p + expected_r)
            if expected_p + expected_r
            else 0.0
        )
        worst = max(
            worst, abs(p - expected_p), abs(r - expected_r), abs(f - expected_f)
        )
        checked += 1
    elapsed = time.monotonic() - start
    ok = checked == 625 and worst == 0.0 and elapsed < 1.0
    check(
        "A7 precision/recall/F vs direct formulas",
        ok,
        f"{checked} count tuples, worst abs err {worst:.1e}, {elapsed:.3f}s",
    )


def test_a8_format_round_trip(tmp_path):
    start = time.monotonic()
    rng = PortableRng(8001)
    names = ["v", "cam-1", "θ-camera", "GH010063", "x" * 40]
    instances = 0
    ok = True
    for i in range(120):
        n = 1 + rng.next_below(8)
        d = 1 + rng.next_below(6)
        data = (
            np.array([[rng.next_gaussian() for _ in range(d)] for _ in range(n)])
            .astype(np.float32)
            .astype(np.float64)
        )
        matrix = FeatureMatrix.from_rows(names[rng.next_below(len(names))], data)
        path = tmp_path / "m.kff"
        save_features(matrix, path)
        loaded = load_features(path)
        save_features(loaded, tmp_path / "m2.kff")
        ok = ok and loaded.data.tobytes() == matrix.data.tobytes()
        ok = ok and loaded.video == matrix.video
        ok = ok and (tmp_path / "m2.kff").read_bytes() == path.read_bytes()
        instances += 1
    for i in range(80):
        kind = KIND_LINEAR if i % 2 == 0 else KIND_ONE_HIDDEN
        dim = 1 + rng.next_below(6)
        hidden = 1 + rng.next_below(4)
        head = init_head(kind, dim, PortableRng(9000 + i), hidden)
        path = tmp_path / "h.kfh"
        save_head(head, path)
        loaded = load_head(path)
        save_head(loaded, tmp_path / "h2.kfh")
        ok = ok and np.array_equal(loaded.to_vector(), head.to_vector())
        ok = ok and loaded.kind == head.kind
        ok = ok and (tmp_path / "h2.kfh").read_bytes() == path.read_bytes()
        instances += 1
    elapsed = time.monotonic() - start
    ok = ok and instances >= 200 and elapsed < 5.0
    check(
        "A8 container round-trips bit-exact",
        ok,
        f"{instances} instances, {elapsed:.3f}s",
    )


def test_a9_bundled_manifest():
    start = time.monotonic()
    manifest = load_reference_manifest()
    counts = manifest.split_counts()
    mean = average_memory_size(manifest)
    elapsed = time.monotonic() - start
    ok = (
        counts[Split.TRAIN] == 13
        and counts[Split.VALIDATION] == 2
        and counts[Split.TEST] == 3
        and abs(mean - 145.95) <= 0.05
        and elapsed < 1.0
    )
    check(
        "A9 bundled manifest splits and mean size",
        ok,
        f"splits {counts[Split.TRAIN]}/{counts[Split.VALIDATION]}/{counts[Split.TEST]}, "
        f"mean {mean:.2f} MB, {elapsed:.3f}s",
    )
