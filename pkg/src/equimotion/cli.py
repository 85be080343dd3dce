"""Command-line interface for the full pipeline lifecycle.

Subcommands cover dataset ingestion, splitting, training both models,
evaluation, cross-validation, single-image inference, the HTTP service,
toy-data generation, and the kernel benchmark. Exit codes: 0 success,
2 usage, 3 data problem, 4 no region of interest, 5 model problem.
"""

import argparse
import json
import os
import sys

import numpy as np

from .errors import DataError, EquimotionError
from . import kernels


def _manifest_ops():
    # local imports keep `--help` fast
    from .dataset import manifest as m
    return m


def _load_split_samples(manifest, base_dir, split_name, need_labels=False):
    """Materialize (images, boxes, labels) for a named split (or all ids)."""
    from .dataset.imageio import load_image

    if split_name == "all":
        ids = [r.id for r in manifest.records]
    else:
        if split_name not in manifest.splits:
            raise DataError("split %r not found in manifest (have: %s)"
                            % (split_name, ", ".join(sorted(manifest.splits)) or "none"))
        ids = manifest.splits[split_name]
    images, boxes, labels = [], [], []
    for image_id in ids:
        record = manifest.record_by_id(image_id)
        anns = manifest.annotations_for(image_id)
        if not anns:
            raise DataError("image %r has no annotation" % image_id)
        ann = anns[0]
        if need_labels and ann.label is None:
            raise DataError("image %r has no emotion label" % image_id)
        images.append(load_image(os.path.join(base_dir, record.uri)))
        boxes.append(ann.box)
        labels.append(None if ann.label is None else int(ann.label))
    return images, boxes, labels


def _classifier_inputs(images, boxes, labels, side):
    from .dataset.geometry import crop_and_resize

    crops = [crop_and_resize(img, box, side) for img, box in zip(images, boxes)]
    return np.stack(crops), np.array(labels, dtype=np.int64)


def _print_json(obj):
    print(json.dumps(obj, sort_keys=True))


# -- subcommand implementations ---------------------------------------

def cmd_synth(args):
    from .dataset.synthetic import write_toy_dataset

    path = write_toy_dataset(args.out, args.per_class, seed=args.seed,
                             height=args.height, width=args.width)
    _print_json({"manifest": path, "images": 4 * args.per_class})
    return 0


def cmd_ingest(args):
    from .dataset.imageio import load_image
    from .ethogram import CUE_DIMENSIONS, CueAnnotation, EmotionLabel

    m = _manifest_ops()
    labels = {}
    with open(args.labels, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if parts[0] == "filename":
                continue
            if len(parts) not in (6, 10):
                raise DataError(
                    "labels line %d: expected 6 or 10 tab-separated columns "
                    "(filename label x y w h [eyes ears nose neck])" % lineno)
            name, label = parts[0], parts[1]
            try:
                x, y, w, h = (int(v) for v in parts[2:6])
                cues = None
                if len(parts) == 10:
                    cues = CueAnnotation.from_dict(dict(zip(CUE_DIMENSIONS, parts[6:10])))
                labels[name] = (EmotionLabel.from_name(label), (x, y, w, h), cues)
            except ValueError as e:
                raise DataError("labels line %d: %s" % (lineno, e)) from e

    manifest = m.DatasetManifest()
    seen = set()
    manifest_dir = os.path.dirname(os.path.abspath(args.out))
    for name in sorted(os.listdir(args.images)):
        if not name.lower().endswith((".png", ".jpg", ".jpeg")):
            continue
        path = os.path.join(args.images, name)
        img = load_image(path)
        image_id = os.path.splitext(name)[0]
        # uri relative to the manifest so the dataset directory is relocatable
        uri = os.path.relpath(os.path.abspath(path), manifest_dir)
        manifest.records.append(m.ImageRecord(
            id=image_id, uri=uri, width=img.shape[1], height=img.shape[0]))
        if name in labels:
            seen.add(name)
            label, (x, y, w, h), cues = labels[name]
            manifest.annotations.append(m.Annotation(
                image_id=image_id, box=m.BoundingBox(x, y, w, h),
                label=label, cues=cues, override=args.override))
    missing = sorted(set(labels) - seen)
    if missing:
        raise DataError("label file references missing images: %s" % ", ".join(missing))
    m.save_manifest(manifest, args.out)
    _print_json({"manifest": args.out, "images": len(manifest.records),
                 "annotations": len(manifest.annotations)})
    return 0


def cmd_split(args):
    from .dataset.splits import SplitSpec, kfold_split, stratified_split, with_kfold_splits

    m = _manifest_ops()
    manifest = m.load_manifest(args.manifest)
    if args.scheme == "holdout":
        spec = SplitSpec(args.train_per_class, args.val_per_class, seed=args.seed)
        manifest = stratified_split(manifest, spec)
        out = {"scheme": "holdout",
               "train": len(manifest.splits["train"]),
               "val": len(manifest.splits["val"])}
    else:
        folds = kfold_split(manifest, args.k, seed=args.seed)
        manifest = with_kfold_splits(manifest, folds)
        out = {"scheme": "kfold", "folds": len(folds)}
    m.save_manifest(manifest, args.manifest)
    _print_json(out)
    return 0


def cmd_train_detector(args):
    from .dataset.geometry import rescale_to_height, scale_box
    from .detector import DetectorConfig, save_detector, train_detector

    m = _manifest_ops()
    manifest = m.load_manifest(args.manifest)
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    images, boxes, _ = _load_split_samples(manifest, base_dir, args.split)
    config = DetectorConfig(epochs=args.epochs, seed=args.seed,
                            image_height=args.height,
                            learning_rate=args.learning_rate)
    scaled_images, scaled_boxes = [], []
    for img, box in zip(images, boxes):
        small, factor = rescale_to_height(img, config.image_height)
        scaled_images.append(small)
        scaled_boxes.append(scale_box(box, factor))
    model, curve = train_detector(scaled_images, scaled_boxes, config)
    save_detector(model, args.out)
    if args.curve_out:
        with open(args.curve_out, "w") as f:
            f.write("epoch,loss\n")
            for i, loss in enumerate(curve, start=1):
                f.write("%d,%.6f\n" % (i, loss))
    _print_json({"model": args.out, "epochs": len(curve),
                 "final_loss": curve[-1] if curve else None})
    return 0


def cmd_train_classifier(args):
    from .classifier import (ClassifierConfig, apply_freeze_policy,
                             build_classifier, save_classifier, train_classifier)

    m = _manifest_ops()
    manifest = m.load_manifest(args.manifest)
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    config = ClassifierConfig(base=args.base, input_side=args.input_side,
                              epochs=args.epochs, learning_rate=args.learning_rate,
                              batch_size=args.batch_size,
                              width_multiplier=args.width_multiplier, seed=args.seed)
    train = _load_split_samples(manifest, base_dir, args.train_split, need_labels=True)
    val = _load_split_samples(manifest, base_dir, args.val_split, need_labels=True)
    train_xy = _classifier_inputs(*train, config.input_side)
    val_xy = _classifier_inputs(*val, config.input_side)
    model = apply_freeze_policy(build_classifier(config))
    report = train_classifier(model, train_xy, val_xy)
    save_classifier(model, args.out)
    if args.report:
        report.save_csv(args.report)
    final = report.entries[-1] if report.entries else None
    _print_json({"model": args.out, "epochs": len(report.entries),
                 "final_train_accuracy": final.train_accuracy if final else None,
                 "final_val_accuracy": final.val_accuracy if final else None})
    return 0


def cmd_evaluate(args):
    from .classifier import load_classifier
    from .classifier.model import predict
    from .evaluation import EvaluationReport

    m = _manifest_ops()
    manifest = m.load_manifest(args.manifest)
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    classifier = load_classifier(args.classifier)
    images, boxes, labels = _load_split_samples(
        manifest, base_dir, args.split, need_labels=True)
    X, y = _classifier_inputs(images, boxes, labels, classifier.config.input_side)
    predictions = [int(predict(classifier, X[i]).label) for i in range(len(X))]
    report = EvaluationReport.from_pairs(predictions, list(y))
    out = {"classifier": report.as_dict()}
    if args.detector:
        from .dataset.geometry import rescale_to_height, scale_box
        from .detector import evaluate_detector, load_detector

        detector = load_detector(args.detector)
        det_images, det_boxes = [], []
        for img, box in zip(images, boxes):
            small, factor = rescale_to_height(img, detector.config.image_height)
            det_images.append(small)
            det_boxes.append(scale_box(box, factor))
        det_eval = evaluate_detector(detector, det_images, det_boxes, args.iou_threshold)
        out["detector"] = det_eval.as_dict()
    if args.out:
        with open(args.out, "w") as f:
            f.write(json.dumps(out, sort_keys=True) + "\n")
    _print_json(out)
    return 0


def cmd_cv(args):
    from .classifier import (ClassifierConfig, apply_freeze_policy,
                             build_classifier, train_classifier)
    from .dataset.splits import kfold_split, with_kfold_splits
    from .evaluation import cv_average

    m = _manifest_ops()
    manifest = m.load_manifest(args.manifest)
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    fold_names = sorted(n.split(".")[0] for n in manifest.splits
                        if "." in n and n.endswith(".val"))
    if not fold_names:
        manifest = with_kfold_splits(manifest, kfold_split(manifest, args.k, seed=args.seed))
        m.save_manifest(manifest, args.manifest)
        fold_names = sorted(n.split(".")[0] for n in manifest.splits if n.endswith(".val"))
    reports = []
    for fold in fold_names:
        config = ClassifierConfig(base=args.base, input_side=args.input_side,
                                  epochs=args.epochs, learning_rate=args.learning_rate,
                                  batch_size=args.batch_size,
                                  width_multiplier=args.width_multiplier, seed=args.seed)
        train = _load_split_samples(manifest, base_dir, fold + ".train", need_labels=True)
        val = _load_split_samples(manifest, base_dir, fold + ".val", need_labels=True)
        model = apply_freeze_policy(build_classifier(config))
        reports.append(train_classifier(
            model, _classifier_inputs(*train, config.input_side),
            _classifier_inputs(*val, config.input_side)))
    curves = cv_average(reports)
    if args.curve_out:
        with open(args.curve_out, "w") as f:
            f.write(curves.to_csv())
    _print_json({"folds": curves.folds,
                 "final_val_accuracy": curves.val_accuracy[-1] if curves.val_accuracy else None,
                 "final_train_accuracy": curves.train_accuracy[-1] if curves.train_accuracy else None})
    return 0


def cmd_infer(args):
    from .classifier import load_classifier
    from .dataset.imageio import load_image
    from .detector import load_detector
    from .pipeline import infer, result_to_dict

    detector = load_detector(args.detector)
    classifier = load_classifier(args.classifier)
    image = load_image(args.image)
    result = infer(detector, classifier, image)
    _print_json(result_to_dict(result, include_timings=args.timings))
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(manifest_path=args.manifest, models_dir=args.models_dir,
                     images_dir=args.images_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_bench(args):
    from .benchmark import format_benchmark, run_benchmark

    rows = run_benchmark(repeats=args.repeats, seed=args.seed)
    if args.json:
        _print_json({"active_backend": kernels.BACKEND, "rows": rows})
    else:
        print("active backend: %s" % kernels.BACKEND)
        print(format_benchmark(rows))
    return 0


# -- parser wiring ----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equimotion",
        description="Horse head-and-neck emotion recognition pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled toy dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--width", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="build a manifest from images + a label file")
    p.add_argument("--images", required=True, help="directory of png/jpg files")
    p.add_argument("--labels", required=True,
                   help="TSV: filename label x y w h [eyes ears nose neck]")
    p.add_argument("--out", required=True, help="manifest path to write")
    p.add_argument("--override", action="store_true",
                   help="keep labels even when they disagree with the cue table")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign train/val or k-fold splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--scheme", choices=("holdout", "kfold"), default="holdout")
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--val-per-class", type=int, default=20)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train-detector", help="train the region detector")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=4000)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve-out", default=None, help="write per-epoch loss CSV")
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser("train-classifier", help="train the emotion classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train-split", default="train")
    p.add_argument("--val-split", default="val")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="write per-epoch metrics CSV")
    p.add_argument("--base", default="vgg16")
    p.add_argument("--input-side", type=int, default=150)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--width-multiplier", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("evaluate", help="score models on a split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="val")
    p.add_argument("--classifier", required=True)
    p.add_argument("--detector", default=None)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    p.add_argument("--out", default=None, help="also write the result object here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="k-fold cross-validation of the classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--base", default="vgg16")
    p.add_argument("--input-side", type=int, default=150)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--width-multiplier", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve-out", default=None, help="write averaged curves CSV")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("infer", help="run the full pipeline on one image")
    p.add_argument("--image", required=True)
    p.add_argument("--detector", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--timings", action="store_true", help="include stage timings")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--models-dir", required=True)
    p.add_argument("--images-dir", default=None,
                   help="defaults to the manifest's directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="compare kernel backends")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args) or 0
    except EquimotionError as e:
        print("error: %s" % e, file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
