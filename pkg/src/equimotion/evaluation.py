"""Accuracy, confusion matrices, and cross-validation curve averaging."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ethogram import EmotionLabel

NUM_CLASSES = len(EmotionLabel)


def _check_pairs(predictions, truths):
    if len(predictions) != len(truths):
        raise DataError("length mismatch: %d predictions vs %d truths"
                        % (len(predictions), len(truths)))
    if len(predictions) == 0:
        raise DataError("empty prediction list")


def accuracy(predictions, truths) -> float:
    """Correct predictions divided by total predictions."""
    _check_pairs(predictions, truths)
    hits = sum(1 for p, t in zip(predictions, truths) if int(p) == int(t))
    return hits / len(predictions)


def confusion_matrix(predictions, truths) -> np.ndarray:
    """4x4 counts; rows are truth, columns are prediction, canonical order."""
    _check_pairs(predictions, truths)
    m = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for p, t in zip(predictions, truths):
        p, t = int(p), int(t)
        if not (0 <= p < NUM_CLASSES and 0 <= t < NUM_CLASSES):
            raise DataError("label out of range: prediction %d, truth %d" % (p, t))
        m[t, p] += 1
    return m


@dataclass(frozen=True)
class EvaluationReport:
    """Accuracy plus the confusion matrix it is the trace of."""

    accuracy: float
    confusion: tuple  # 4x4 nested tuples, rows = truth
    n: int

    @classmethod
    def from_pairs(cls, predictions, truths) -> "EvaluationReport":
        m = confusion_matrix(predictions, truths)
        return cls(accuracy(predictions, truths),
                   tuple(tuple(int(v) for v in row) for row in m),
                   len(predictions))

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy,
                "confusion": [list(r) for r in self.confusion],
                "n": self.n}

    def to_record(self) -> str:
        """One structured-record line, manifest style."""
        return json.dumps({"kind": "evaluation", **self.as_dict()}, sort_keys=True)

    def to_csv(self) -> str:
        """Confusion rows labeled by truth, with a trailing accuracy row."""
        names = [label.label for label in EmotionLabel]
        lines = ["truth\\pred," + ",".join(names)]
        for label, row in zip(EmotionLabel, self.confusion):
            lines.append(label.label + "," + ",".join(str(v) for v in row))
        lines.append("accuracy,%.6f" % self.accuracy)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CvCurves:
    """Fold-averaged learning curves; one value per epoch."""

    val_accuracy: tuple
    train_accuracy: tuple
    folds: int

    def as_dict(self) -> dict:
        return {"folds": self.folds,
                "val_accuracy": list(self.val_accuracy),
                "train_accuracy": list(self.train_accuracy)}

    def to_csv(self) -> str:
        lines = ["epoch,val_accuracy,train_accuracy"]
        for i, (v, t) in enumerate(zip(self.val_accuracy, self.train_accuracy), start=1):
            lines.append("%d,%.6f,%.6f" % (i, v, t))
        return "\n".join(lines) + "\n"


def cv_average(reports) -> CvCurves:
    """Element-wise mean of per-epoch accuracy curves across folds.

    Validation accuracy is the primary curve; train accuracy is averaged
    alongside it. All reports must cover the same number of epochs.
    """
    reports = list(reports)
    if not reports:
        raise DataError("empty report list")
    lengths = {len(r.entries) for r in reports}
    if len(lengths) != 1:
        raise DataError("mismatched epoch counts across folds: %s"
                        % sorted(lengths))
    val = np.mean([[e.val_accuracy for e in r.entries] for r in reports], axis=0)
    train = np.mean([[e.train_accuracy for e in r.entries] for r in reports], axis=0)
    return CvCurves(tuple(float(v) for v in val), tuple(float(t) for t in train), len(reports))
