"""CLI behavior: command flows, artifact files, exit codes."""

import json
import shutil

import numpy as np
import pytest

from equimotion.classifier import load_classifier
from equimotion.cli import main
from equimotion.dataset.imageio import save_image
from equimotion.dataset.manifest import load_manifest
from equimotion.detector import load_detector
from equimotion.ethogram import EmotionLabel

SMALL_CLF = ["--input-side", "64", "--width-multiplier", "0.25",
             "--batch-size", "4", "--seed", "0"]


def run(capsys, argv):
    """Invoke the CLI in-process; returns (exit code, stdout, stderr)."""
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


@pytest.fixture(scope="module")
def toy_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-data")
    assert main(["synth", "--out", str(d), "--per-class", "3", "--seed", "5",
                 "--height", "96", "--width", "128"]) == 0
    assert main(["split", "--manifest", str(d / "manifest.jsonl"),
                 "--scheme", "holdout", "--train-per-class", "2",
                 "--val-per-class", "1", "--seed", "0"]) == 0
    return d


@pytest.fixture(scope="module")
def quick_artifacts(toy_dir, tmp_path_factory):
    """Short training runs; exists to prove the commands work, not the models."""
    d = tmp_path_factory.mktemp("cli-models")
    mf = str(toy_dir / "manifest.jsonl")
    assert main(["train-detector", "--manifest", mf, "--split", "train",
                 "--out", str(d / "det.npz"), "--epochs", "2", "--height", "96",
                 "--seed", "1", "--curve-out", str(d / "curve.csv")]) == 0
    assert main(["train-classifier", "--manifest", mf,
                 "--out", str(d / "clf.npz"), "--report", str(d / "report.csv"),
                 "--epochs", "2"] + SMALL_CLF) == 0
    return d


def test_synth_writes_images_and_manifest(tmp_path, capsys):
    rc, out, _ = run(capsys, ["synth", "--out", str(tmp_path), "--per-class", "1",
                              "--seed", "0", "--height", "64", "--width", "96"])
    assert rc == 0
    assert json.loads(out)["images"] == 4
    assert (tmp_path / "manifest.jsonl").exists()
    assert len(list(tmp_path.glob("*.png"))) == 4
    manifest = load_manifest(tmp_path / "manifest.jsonl")
    assert len(manifest.records) == 4
    assert len(manifest.annotations) == 4


def test_split_is_stratified_and_disjoint(toy_dir):
    manifest = load_manifest(toy_dir / "manifest.jsonl")
    train, val = manifest.splits["train"], manifest.splits["val"]
    assert len(train) == 8 and len(val) == 4
    assert not set(train) & set(val)
    for split, per_class in ((train, 2), (val, 1)):
        counts = {label: 0 for label in EmotionLabel}
        for image_id in split:
            counts[manifest.annotations_for(image_id)[0].label] += 1
        assert all(v == per_class for v in counts.values())


def test_split_same_seed_same_assignment(toy_dir, tmp_path, capsys):
    copy = tmp_path / "manifest.jsonl"
    shutil.copy(toy_dir / "manifest.jsonl", copy)
    rc, _, _ = run(capsys, ["split", "--manifest", str(copy), "--scheme", "holdout",
                            "--train-per-class", "2", "--val-per-class", "1",
                            "--seed", "0"])
    assert rc == 0
    a = load_manifest(toy_dir / "manifest.jsonl").splits
    b = load_manifest(copy).splits
    assert a["train"] == b["train"] and a["val"] == b["val"]


def test_kfold_split_command(toy_dir, tmp_path, capsys):
    copy = tmp_path / "manifest.jsonl"
    shutil.copy(toy_dir / "manifest.jsonl", copy)
    rc, out, _ = run(capsys, ["split", "--manifest", str(copy), "--scheme", "kfold",
                              "--k", "3", "--seed", "0"])
    assert rc == 0
    assert json.loads(out) == {"scheme": "kfold", "folds": 3}
    manifest = load_manifest(copy)
    splits = manifest.splits
    everything = {r.id for r in manifest.records}
    val_ids = set()
    for i in range(1, 4):
        fold = f"fold{i:02d}"
        train, val = set(splits[fold + ".train"]), set(splits[fold + ".val"])
        assert not train & val
        assert train | val == everything
        val_ids |= val
    assert val_ids == everything  # every image lands in exactly one val fold


def test_train_detector_artifact_and_curve(quick_artifacts):
    model = load_detector(quick_artifacts / "det.npz")
    assert model.config.image_height == 96
    lines = (quick_artifacts / "curve.csv").read_text().splitlines()
    assert lines[0] == "epoch,loss"
    assert len(lines) == 3


def test_train_classifier_artifact_and_report(quick_artifacts):
    model = load_classifier(quick_artifacts / "clf.npz")
    assert model.config.input_side == 64
    assert any(not p.trainable for p in model.params())  # freeze policy applied
    lines = (quick_artifacts / "report.csv").read_text().splitlines()
    assert lines[0] == "epoch,train_accuracy,val_accuracy,train_loss,val_loss"
    assert len(lines) == 3


def test_train_classifier_zero_epochs(toy_dir, tmp_path, capsys):
    rc, out, _ = run(capsys, ["train-classifier",
                              "--manifest", str(toy_dir / "manifest.jsonl"),
                              "--out", str(tmp_path / "clf.npz"),
                              "--report", str(tmp_path / "report.csv"),
                              "--epochs", "0"] + SMALL_CLF)
    assert rc == 0
    payload = json.loads(out)
    assert payload["epochs"] == 0
    assert payload["final_val_accuracy"] is None
    assert (tmp_path / "report.csv").read_text() == \
        "epoch,train_accuracy,val_accuracy,train_loss,val_loss\n"
    load_classifier(tmp_path / "clf.npz")  # artifact still valid


def test_evaluate_reports_accuracy_and_confusion(toy_dir, quick_artifacts, tmp_path, capsys):
    out_file = tmp_path / "eval.json"
    rc, out, _ = run(capsys, ["evaluate", "--manifest", str(toy_dir / "manifest.jsonl"),
                              "--split", "val",
                              "--classifier", str(quick_artifacts / "clf.npz"),
                              "--detector", str(quick_artifacts / "det.npz"),
                              "--out", str(out_file)])
    assert rc == 0
    payload = json.loads(out)
    clf = payload["classifier"]
    assert 0.0 <= clf["accuracy"] <= 1.0
    assert clf["n"] == 4
    assert sum(sum(row) for row in clf["confusion"]) == 4
    assert "recall" in payload["detector"]
    assert json.loads(out_file.read_text()) == payload


def test_infer_success(toy_model_files, toy_scenes, tmp_path, capsys):
    img_path = tmp_path / "scene.png"
    save_image(toy_scenes[0][0], str(img_path))
    base = ["infer", "--image", str(img_path),
            "--detector", str(toy_model_files / "detector-toy.npz"),
            "--classifier", str(toy_model_files / "classifier-toy.npz")]
    rc, out, _ = run(capsys, base)
    assert rc == 0
    payload = json.loads(out)
    assert set(payload) == {"roi", "score", "label", "probabilities"}
    assert payload["label"] in [l.label for l in EmotionLabel]
    assert abs(sum(payload["probabilities"]) - 1.0) < 1e-6
    assert len(payload["roi"]) == 4

    rc, out, _ = run(capsys, base + ["--timings"])
    assert rc == 0
    assert "total_ms" in json.loads(out)["timings"]


def test_infer_no_roi_exits_4(toy_model_files, tmp_path, capsys):
    img_path = tmp_path / "flat.png"
    save_image(np.full((192, 256, 3), 40, dtype=np.uint8), str(img_path))
    rc, _, err = run(capsys, ["infer", "--image", str(img_path),
                              "--detector", str(toy_model_files / "detector-toy.npz"),
                              "--classifier", str(toy_model_files / "classifier-toy.npz")])
    assert rc == 4
    assert err.startswith("error:")


def test_infer_missing_image_exits_3(toy_model_files, capsys):
    rc, _, err = run(capsys, ["infer", "--image", "/nonexistent/img.png",
                              "--detector", str(toy_model_files / "detector-toy.npz"),
                              "--classifier", str(toy_model_files / "classifier-toy.npz")])
    assert rc == 3
    assert err.startswith("error:")


def test_infer_corrupt_model_exits_5(toy_model_files, toy_scenes, tmp_path, capsys):
    img_path = tmp_path / "scene.png"
    save_image(toy_scenes[0][0], str(img_path))
    bad = tmp_path / "bad.npz"
    bad.write_bytes(b"this is not a model")
    rc, _, err = run(capsys, ["infer", "--image", str(img_path),
                              "--detector", str(bad),
                              "--classifier", str(toy_model_files / "classifier-toy.npz")])
    assert rc == 5
    assert err.startswith("error:")


def test_usage_errors_exit_2(capsys):
    assert run(capsys, [])[0] == 2
    assert run(capsys, ["no-such-command"])[0] == 2
    assert run(capsys, ["train-detector"])[0] == 2  # missing required args


def test_unknown_split_is_a_data_error(toy_dir, tmp_path, capsys):
    rc, _, err = run(capsys, ["train-detector",
                              "--manifest", str(toy_dir / "manifest.jsonl"),
                              "--split", "nope", "--out", str(tmp_path / "d.npz"),
                              "--epochs", "1", "--height", "96"])
    assert rc == 3
    assert "not found" in err


def test_cv_command(toy_dir, tmp_path, capsys):
    data = tmp_path / "data"
    shutil.copytree(toy_dir, data)
    rc, out, _ = run(capsys, ["cv", "--manifest", str(data / "manifest.jsonl"),
                              "--k", "2", "--epochs", "1"] + SMALL_CLF +
                     ["--curve-out", str(tmp_path / "cv.csv")])
    assert rc == 0
    payload = json.loads(out)
    assert payload["folds"] == 2
    assert 0.0 <= payload["final_val_accuracy"] <= 1.0
    lines = (tmp_path / "cv.csv").read_text().splitlines()
    assert lines[0] == "epoch,val_accuracy,train_accuracy"
    assert len(lines) == 2
    # fold splits were created and persisted on first use
    assert "fold01.val" in load_manifest(data / "manifest.jsonl").splits


def test_ingest_builds_manifest(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    rng = np.random.default_rng(0)
    for name in ("a.png", "b.png"):
        save_image(rng.integers(0, 255, (60, 80, 3), dtype=np.uint8),
                   str(images / name))
    labels = tmp_path / "labels.tsv"
    labels.write_text(
        "a.png\tRelaxed\t10\t10\t30\t20\n"
        "b.png\tAlarmed\t5\t8\t40\t30\topen_no_sclera\tstiff_forward"
        "\topen_nostrils_tense\tabove_parallel\n")
    out = tmp_path / "manifest.jsonl"
    rc, stdout, _ = run(capsys, ["ingest", "--images", str(images),
                                 "--labels", str(labels), "--out", str(out)])
    assert rc == 0
    assert json.loads(stdout) == {"annotations": 2, "images": 2,
                                  "manifest": str(out)}
    manifest = load_manifest(out)
    by_id = {a.image_id: a for a in manifest.annotations}
    assert by_id["a"].cues is None
    assert by_id["b"].cues is not None
    assert by_id["b"].label is EmotionLabel.ALARMED
    assert by_id["a"].box.as_list() == [10, 10, 30, 20]


def test_ingest_missing_image_reference(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    save_image(np.zeros((32, 32, 3), dtype=np.uint8), str(images / "a.png"))
    labels = tmp_path / "labels.tsv"
    labels.write_text("a.png\tRelaxed\t1\t1\t8\t8\n"
                      "ghost.png\tAlarmed\t1\t1\t8\t8\n")
    rc, _, err = run(capsys, ["ingest", "--images", str(images),
                              "--labels", str(labels),
                              "--out", str(tmp_path / "m.jsonl")])
    assert rc == 3
    assert "ghost.png" in err


def test_ingest_rejects_bad_column_count(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    save_image(np.zeros((32, 32, 3), dtype=np.uint8), str(images / "a.png"))
    labels = tmp_path / "labels.tsv"
    labels.write_text("a.png\tRelaxed\t1\t1\n")
    rc, _, err = run(capsys, ["ingest", "--images", str(images),
                              "--labels", str(labels),
                              "--out", str(tmp_path / "m.jsonl")])
    assert rc == 3
    assert "6 or 10" in err


def test_ingest_rejects_unknown_cue_value(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    save_image(np.zeros((32, 32, 3), dtype=np.uint8), str(images / "a.png"))
    labels = tmp_path / "labels.tsv"
    labels.write_text("a.png\tAlarmed\t1\t1\t8\t8\twide\tstiff_forward"
                      "\topen_nostrils_tense\tabove_parallel\n")
    rc, _, err = run(capsys, ["ingest", "--images", str(images),
                              "--labels", str(labels),
                              "--out", str(tmp_path / "m.jsonl")])
    assert rc == 3
    assert "unknown eyes cue" in err


def test_bench_json(capsys):
    rc, out, _ = run(capsys, ["bench", "--repeats", "1", "--json"])
    assert rc == 0
    payload = json.loads(out)
    assert payload["active_backend"] in ("numba", "numpy")
    cases = [r["case"] for r in payload["rows"]]
    assert len(cases) == len(set(cases)) == 7
    for row in payload["rows"]:
        assert row["numpy_ms"] > 0.0
        assert row["numba_ms"] is None or row["numba_ms"] > 0.0
