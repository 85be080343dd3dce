"""Deterministic stratified and k-fold split generation.

Both schemes shuffle each class's id list (sorted lexicographically
first, so results do not depend on manifest row order) with a generator
seeded by (seed, class index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..ethogram import EmotionLabel
from .manifest import DatasetManifest


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int
    val_per_class: int
    seed: int = 0

    def __post_init__(self):
        if self.train_per_class < 1 or self.val_per_class < 1:
            raise DataError("split counts must be >= 1")


def _shuffled_class_ids(manifest: DatasetManifest, seed: int) -> dict[EmotionLabel, list[str]]:
    out = {}
    for label, ids in manifest.labeled_ids_by_class().items():
        ids = sorted(ids)
        rng = np.random.default_rng([seed, int(label)])
        rng.shuffle(ids)
        out[label] = ids
    return out


def stratified_split(manifest: DatasetManifest, spec: SplitSpec) -> DatasetManifest:
    """Assign train/val splits with exact per-class counts.

    Returns the manifest with splits {"train", "val"} set (records and
    annotations shared, not copied). Unassigned labeled images stay out
    of both parts.
    """
    per_class = _shuffled_class_ids(manifest, spec.seed)
    need = spec.train_per_class + spec.val_per_class
    train, val = [], []
    for label in sorted(per_class):
        ids = per_class[label]
        if len(ids) < need:
            raise DataError(
                f"insufficient class {label.label}: need {need} labeled images, have {len(ids)}")
        train.extend(ids[:spec.train_per_class])
        val.extend(ids[spec.train_per_class:need])
    out = DatasetManifest(records=manifest.records, annotations=manifest.annotations,
                          splits=dict(manifest.splits))
    out.splits["train"] = train
    out.splits["val"] = val
    out.validate()
    return out


def kfold_split(manifest: DatasetManifest, k: int = 10, seed: int = 0) -> list[tuple[list[str], list[str]]]:
    """Stratified k-fold partition of the labeled images.

    Returns k (train_ids, val_ids) pairs; every labeled image appears in
    exactly one validation fold. Per class, fold sizes differ by at most
    one image.
    """
    if k < 2:
        raise DataError("k must be >= 2")
    per_class = _shuffled_class_ids(manifest, seed)
    for label, ids in per_class.items():
        if 0 < len(ids) < k:
            raise DataError(f"class {label.label} has {len(ids)} labeled images, fewer than k={k}")
    chunks: list[list[str]] = [[] for _ in range(k)]
    for label in sorted(per_class):
        ids = per_class[label]
        base, extra = divmod(len(ids), k)
        start = 0
        for fold in range(k):
            size = base + (1 if fold < extra else 0)
            chunks[fold].extend(ids[start:start + size])
            start += size
    all_ids = sorted(i for ids in per_class.values() for i in ids)
    folds = []
    for fold in range(k):
        val = chunks[fold]
        val_set = set(val)
        train = [i for i in all_ids if i not in val_set]
        folds.append((train, val))
    return folds


def with_kfold_splits(manifest: DatasetManifest, folds) -> DatasetManifest:
    """Persist kfold output as splits named foldNN.train / foldNN.val."""
    out = DatasetManifest(records=manifest.records, annotations=manifest.annotations,
                          splits=dict(manifest.splits))
    for i, (train, val) in enumerate(folds, start=1):
        out.splits[f"fold{i:02d}.train"] = list(train)
        out.splits[f"fold{i:02d}.val"] = list(val)
    out.validate()
    return out
