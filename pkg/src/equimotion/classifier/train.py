"""Classifier training with frozen-prefix feature caching.

Blocks whose parameters are all frozen form a fixed function of the
input, so their output is computed once per training run and reused
every epoch. With the standard freeze policy that leaves only the last
base block and the head in the per-epoch loop.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..ethogram import EmotionLabel
from ..nn import Adam, softmax_cross_entropy
from .model import ClassifierConfig, ClassifierModel, preprocess

_PREFIX_CHUNK = 8  # images per chunk when materializing cached features


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_accuracy: float
    val_accuracy: float
    train_loss: float
    val_loss: float


@dataclass(frozen=True)
class TrainReport:
    entries: tuple
    config: dict
    seed: int
    model: "ClassifierModel | None" = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epoch", "train_accuracy", "val_accuracy", "train_loss", "val_loss"])
        for e in self.entries:
            writer.writerow([e.epoch,
                             "%.6f" % e.train_accuracy, "%.6f" % e.val_accuracy,
                             "%.6f" % e.train_loss, "%.6f" % e.val_loss])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write(self.to_csv())

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "entries": [
                {"epoch": e.epoch, "train_accuracy": e.train_accuracy,
                 "val_accuracy": e.val_accuracy, "train_loss": e.train_loss,
                 "val_loss": e.val_loss}
                for e in self.entries
            ],
        }


def _check_split(model, images, labels, what):
    if len(images) == 0:
        raise DataError("empty %s split" % what)
    if len(images) != len(labels):
        raise DataError("%s split: images and labels differ in length" % what)
    model.check_input(images)
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() >= model.config.num_classes:
        raise DataError("%s split: labels must lie in [0, %d)" % (what, model.config.num_classes))


def _split_layers(model):
    """Leading all-frozen blocks vs the trainable remainder (incl. head)."""
    prefix, suffix = [], []
    in_prefix = True
    for _, block in model.base.blocks:
        params = block.params()
        if in_prefix and params and all(not p.trainable for p in params):
            prefix.append(block)
        else:
            in_prefix = False
            suffix.append(block)
    suffix.append(model.head)
    return prefix, suffix


def _run_prefix(prefix, images):
    if not prefix:
        return preprocess(images)
    chunks = []
    for start in range(0, len(images), _PREFIX_CHUNK):
        x = preprocess(images[start:start + _PREFIX_CHUNK])
        for block in prefix:
            x = block.forward(x)
        chunks.append(x)
    return np.concatenate(chunks, axis=0)


def _run_suffix(suffix, x, train=False):
    for layer in suffix:
        x = layer.forward(x, train=train)
    return x


def _backward_suffix(suffix, grad):
    for layer in reversed(suffix):
        grad = layer.backward(grad)


def _evaluate(suffix, feats, labels, batch):
    losses = 0.0
    hits = 0
    for start in range(0, len(feats), batch):
        f = feats[start:start + batch]
        y = labels[start:start + batch]
        logits = _run_suffix(suffix, f)
        loss, _, probs = softmax_cross_entropy(logits, y)
        losses += loss * len(y)
        hits += int((probs.argmax(axis=1) == y).sum())
    return hits / len(feats), losses / len(feats)


def train_classifier(model: ClassifierModel, train, val, config: ClassifierConfig = None) -> TrainReport:
    """Fit the classifier head (and any unfrozen blocks) on (images, labels).

    `train` and `val` are (uint8 images (N, side, side, 3), int labels)
    pairs. The current trainability mask decides what moves: run
    apply_freeze_policy first for the standard transfer regime. Train
    accuracy/loss are the running averages seen during the epoch; val
    metrics are computed after it. Reproducible for a fixed seed.
    """
    cfg = config if config is not None else model.config
    train_x, train_y = train
    val_x, val_y = val
    train_y = np.asarray(train_y, dtype=np.int64)
    val_y = np.asarray(val_y, dtype=np.int64)
    _check_split(model, train_x, train_y, "training")
    _check_split(model, val_x, val_y, "validation")
    present = set(int(v) for v in np.unique(train_y))
    for label in EmotionLabel:
        if int(label) not in present:
            raise DataError("class absent from training data: %s" % label.label)

    entries = []
    if cfg.epochs > 0:
        prefix, suffix = _split_layers(model)
        train_feats = _run_prefix(prefix, train_x)
        val_feats = _run_prefix(prefix, val_x)
        opt = Adam([p for layer in suffix for p in layer.params()], lr=cfg.learning_rate)
        rng = np.random.default_rng(cfg.seed)
        n = len(train_feats)
        for epoch in range(1, cfg.epochs + 1):
            order = rng.permutation(n)
            run_loss = 0.0
            run_hits = 0
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                logits = _run_suffix(suffix, train_feats[idx], train=True)
                loss, grad, probs = softmax_cross_entropy(logits, train_y[idx])
                opt.zero_grad()
                _backward_suffix(suffix, grad)
                opt.step()
                run_loss += loss * len(idx)
                run_hits += int((probs.argmax(axis=1) == train_y[idx]).sum())
            val_acc, val_loss = _evaluate(suffix, val_feats, val_y, cfg.batch_size)
            entries.append(EpochMetrics(epoch, run_hits / n, val_acc, run_loss / n, val_loss))
    return TrainReport(tuple(entries), cfg.as_dict(), cfg.seed, model)
