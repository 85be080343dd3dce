import numpy as np
import pytest

from equimotion.dataset import (
    Annotation,
    BoundingBox,
    DatasetManifest,
    ImageRecord,
    SplitSpec,
    kfold_split,
    stratified_split,
    with_kfold_splits,
)
from equimotion.errors import DataError
from equimotion.ethogram import EmotionLabel


def synthetic_manifest(per_class, shuffle_seed=None):
    m = DatasetManifest()
    i = 0
    for label in EmotionLabel:
        count = per_class[label] if isinstance(per_class, dict) else per_class
        for _ in range(count):
            iid = f"img{i:04d}"
            m.records.append(ImageRecord(iid, f"{iid}.png", 200, 200))
            m.annotations.append(Annotation(iid, BoundingBox(0, 0, 50, 50), label))
            i += 1
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        rng.shuffle(m.records)
        rng.shuffle(m.annotations)
    return m


def label_of(manifest, image_id):
    for ann in manifest.annotations:
        if ann.image_id == image_id and ann.label is not None:
            return ann.label
    raise KeyError(image_id)


def test_stratified_paper_counts():
    m = synthetic_manifest(120)
    out = stratified_split(m, SplitSpec(train_per_class=100, val_per_class=20, seed=7))
    assert len(out.splits["train"]) == 400
    assert len(out.splits["val"]) == 80
    for label in EmotionLabel:
        assert sum(label_of(out, i) == label for i in out.splits["train"]) == 100
        assert sum(label_of(out, i) == label for i in out.splits["val"]) == 20
    assert not set(out.splits["train"]) & set(out.splits["val"])


def test_stratified_insufficient_class():
    m = synthetic_manifest({EmotionLabel.ALARMED: 120, EmotionLabel.ANNOYED: 120,
                            EmotionLabel.CURIOUS: 50, EmotionLabel.RELAXED: 120})
    with pytest.raises(DataError, match="insufficient class Curious"):
        stratified_split(m, SplitSpec(100, 20, seed=1))


def test_stratified_deterministic():
    a = stratified_split(synthetic_manifest(30), SplitSpec(20, 5, seed=9))
    b = stratified_split(synthetic_manifest(30), SplitSpec(20, 5, seed=9))
    assert a.splits == b.splits
    c = stratified_split(synthetic_manifest(30), SplitSpec(20, 5, seed=10))
    assert c.splits != a.splits


def test_stratified_invariant_under_record_reorder():
    plain = stratified_split(synthetic_manifest(30), SplitSpec(20, 5, seed=3))
    shuffled = stratified_split(synthetic_manifest(30, shuffle_seed=77), SplitSpec(20, 5, seed=3))
    assert sorted(plain.splits["train"]) == sorted(shuffled.splits["train"])
    assert sorted(plain.splits["val"]) == sorted(shuffled.splits["val"])


def test_kfold_partition_and_stratification():
    m = synthetic_manifest(120)
    folds = kfold_split(m, k=10, seed=4)
    assert len(folds) == 10
    all_val = []
    for train, val in folds:
        assert len(val) == 48
        assert len(train) == 480 - 48
        for label in EmotionLabel:
            assert sum(label_of(m, i) == label for i in val) == 12
        assert not set(train) & set(val)
        all_val.extend(val)
    assert sorted(all_val) == sorted(i.id for i in m.records)


def test_kfold_k1_rejected():
    with pytest.raises(DataError, match="k must be >= 2"):
        kfold_split(synthetic_manifest(12), k=1)


def test_kfold_small_class_rejected():
    m = synthetic_manifest({EmotionLabel.ALARMED: 12, EmotionLabel.ANNOYED: 12,
                            EmotionLabel.CURIOUS: 5, EmotionLabel.RELAXED: 12})
    with pytest.raises(DataError, match="fewer than k"):
        kfold_split(m, k=10)


def test_kfold_deterministic_and_order_invariant():
    a = kfold_split(synthetic_manifest(20), k=5, seed=2)
    b = kfold_split(synthetic_manifest(20, shuffle_seed=13), k=5, seed=2)
    assert a == b


def test_with_kfold_splits_names_and_disjointness():
    m = synthetic_manifest(10)
    out = with_kfold_splits(m, kfold_split(m, k=5, seed=1))
    assert "fold01.train" in out.splits and "fold05.val" in out.splits
    out.validate()
