import numpy as np
import pytest

from equimotion import kernels
from equimotion.dataset.manifest import BoundingBox
from equimotion.dataset.synthetic import make_detector_set
from equimotion.detector import (
    Detection,
    DetectorConfig,
    DetectorModel,
    anchor_grid,
    base_anchors,
    best_roi,
    decode_boxes,
    detect,
    encode_boxes,
    evaluate_detector,
    iou,
    load_detector,
    match_anchors,
    save_detector,
    train_detector,
)
from equimotion.errors import DataError, ModelError

# small, fast configuration for unit-level training runs
TOY = dict(image_height=96, backbone_channels=(8, 16, 32), rpn_channels=32,
           anchor_scales=(24, 48), anchor_ratios=(0.5, 1.0, 2.0))


def toy_set(n, seed=3, height=96, width=128):
    imgs, boxes, _ = make_detector_set(n, seed=seed, height=height, width=width)
    return list(imgs), list(boxes)


# -- anchors and box transforms ---------------------------------------

def test_encode_decode_round_trip():
    rng = np.random.default_rng(0)
    ref = np.column_stack([
        rng.uniform(0, 50, 200), rng.uniform(0, 50, 200),
        rng.uniform(4, 60, 200), rng.uniform(4, 60, 200)])
    target = np.column_stack([
        rng.uniform(0, 50, 200), rng.uniform(0, 50, 200),
        rng.uniform(4, 60, 200), rng.uniform(4, 60, 200)])
    back = decode_boxes(ref, encode_boxes(ref, target))
    np.testing.assert_allclose(back, target, atol=1e-9)


def test_decode_identity_for_zero_deltas():
    ref = np.array([[10.0, 20.0, 30.0, 40.0]])
    np.testing.assert_allclose(decode_boxes(ref, np.zeros((1, 4))), ref)


def test_base_anchor_areas_and_ratios():
    anchors = base_anchors((32, 64), (0.5, 1.0, 2.0))
    assert anchors.shape == (6, 4)
    for _, _, w, h in anchors:
        assert w > 0 and h > 0
    areas = anchors[:, 2] * anchors[:, 3]
    np.testing.assert_allclose(areas[:3], 32 * 32)
    np.testing.assert_allclose(areas[3:], 64 * 64)
    np.testing.assert_allclose(anchors[0, 3] / anchors[0, 2], 0.5)
    np.testing.assert_allclose(anchors[2, 3] / anchors[2, 2], 2.0)


def test_anchor_grid_layout():
    anchors = base_anchors((8,), (1.0,))
    grid = anchor_grid(2, 3, 8, anchors)
    assert grid.shape == (6, 4)
    # first cell center is (4, 4): an 8x8 anchor starts at (0, 0)
    np.testing.assert_allclose(grid[0], [0, 0, 8, 8])
    # next cell along x
    np.testing.assert_allclose(grid[1], [8, 0, 8, 8])
    # second row
    np.testing.assert_allclose(grid[3], [0, 8, 8, 8])


def test_match_anchors_bands_and_argmax():
    anchors = np.array([
        [0, 0, 10, 10],    # exact match
        [0, 0, 9, 10],     # high overlap
        [40, 40, 10, 10],  # none
        [2, 2, 10, 10],    # middling
    ], dtype=np.float64)
    labels, ious = match_anchors(anchors, [0, 0, 10, 10])
    assert labels[0] == 1 and ious[0] == 1.0
    assert labels[1] == 1
    assert labels[2] == 0
    assert labels[3] == -1  # between the bands
    # argmax stays positive even when nothing clears the positive band
    labels2, _ = match_anchors(anchors[2:], [0, 0, 10, 10])
    assert labels2[1] == 1


# -- config validation ------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(anchor_scales=()),
    dict(anchor_scales=(0,)),
    dict(anchor_ratios=(-1.0,)),
    dict(proposal_nms_iou=0.0),
    dict(proposal_nms_iou=1.0),
    dict(score_threshold=1.5),
    dict(epochs=-1),
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(DataError):
        DetectorConfig(**kwargs)


def test_config_round_trips_through_dict():
    cfg = DetectorConfig(epochs=7, anchor_scales=(16, 32))
    assert DetectorConfig.from_dict(cfg.as_dict()) == cfg


# -- inference behavior ----------------------------------------------

def test_untrained_model_detects_nothing():
    imgs, _ = toy_set(1)
    model = DetectorModel(DetectorConfig(epochs=0, **TOY))
    assert detect(model, imgs[0]) == []
    assert best_roi([]) is None


def test_detect_rejects_wrong_height():
    model = DetectorModel(DetectorConfig(epochs=0, **TOY))
    bad = np.zeros((97, 128, 3), dtype=np.uint8)
    with pytest.raises(DataError, match="height"):
        detect(model, bad)


def test_best_roi_tie_breaks_on_position():
    a = Detection(BoundingBox(5, 9, 10, 10), 0.8)
    b = Detection(BoundingBox(5, 2, 10, 10), 0.8)
    c = Detection(BoundingBox(3, 50, 10, 10), 0.8)
    assert best_roi([a, b, c]) == c          # smaller x wins
    assert best_roi([a, b]) == b             # then smaller y
    assert best_roi([a, Detection(BoundingBox(90, 90, 5, 5), 0.9)]).score == 0.9


def test_iou_matches_kernel_oracle():
    a = BoundingBox(0, 0, 10, 10)
    b = BoundingBox(5, 5, 10, 10)
    assert iou(a, a) == 1.0
    assert abs(iou(a, b) - 25 / 175) < 1e-12
    assert iou(a, b) == iou(b, a)


# -- training ---------------------------------------------------------

@pytest.fixture(scope="module")
def trained():
    imgs, boxes = toy_set(4)
    cfg = DetectorConfig(epochs=120, seed=1, **TOY)
    model, curve = train_detector(imgs, boxes, cfg)
    return model, curve, imgs, boxes


def test_training_errors():
    cfg = DetectorConfig(epochs=1, **TOY)
    with pytest.raises(DataError, match="empty training set"):
        train_detector([], [], cfg)
    imgs, boxes = toy_set(1)
    wrong = [np.zeros((100, 128, 3), dtype=np.uint8)]
    with pytest.raises(DataError, match="height"):
        train_detector(wrong, boxes, cfg)
    with pytest.raises(DataError, match="outside"):
        train_detector(imgs, [BoundingBox(100, 50, 60, 60)], cfg)


def test_zero_epochs_returns_untrained_model():
    imgs, boxes = toy_set(2)
    model, curve = train_detector(imgs, boxes, DetectorConfig(epochs=0, **TOY))
    assert curve == []
    assert detect(model, imgs[0]) == []


def test_loss_decreases(trained):
    _, curve, _, _ = trained
    assert len(curve) == 120
    assert curve[-1] < curve[0]


def test_detect_postconditions(trained):
    model, _, imgs, _ = trained
    for img in imgs:
        dets = detect(model, img)
        scores = [d.score for d in dets]
        assert scores == sorted(scores, reverse=True)
        assert all(s >= model.config.score_threshold for s in scores)
        for i in range(len(dets)):
            for j in range(i + 1, len(dets)):
                assert iou(dets[i].box, dets[j].box) <= model.config.proposal_nms_iou


def test_detect_is_deterministic(trained):
    model, _, imgs, _ = trained
    assert detect(model, imgs[0]) == detect(model, imgs[0])


def test_trained_model_finds_toy_targets(trained):
    model, _, imgs, boxes = trained
    ev = evaluate_detector(model, imgs, boxes, iou_threshold=0.5)
    assert ev.recall == 1.0
    assert ev.precision == 1.0
    for r in ev.per_image:
        assert r.iou is not None and r.iou >= 0.5


def test_evaluate_no_detections(trained):
    _, _, imgs, boxes = trained
    blank = DetectorModel(DetectorConfig(epochs=0, **TOY))
    ev = evaluate_detector(blank, imgs, boxes)
    assert ev.precision is None
    assert ev.recall == 0.0
    assert all(r.iou is None and not r.correct for r in ev.per_image)


def test_evaluate_empty_set_errors(trained):
    model, _, _, _ = trained
    with pytest.raises(DataError, match="empty validation set"):
        evaluate_detector(model, [], [])


def test_strict_threshold_only_counts_exact(trained):
    model, _, imgs, boxes = trained
    ev = evaluate_detector(model, imgs, boxes, iou_threshold=1.0)
    for r in ev.per_image:
        assert r.correct == (r.iou == 1.0)


# -- serialization ----------------------------------------------------

def test_save_load_round_trip(tmp_path, trained):
    model, _, imgs, _ = trained
    path = tmp_path / "det.npz"
    save_detector(model, path)
    again = load_detector(path)
    assert again.config == model.config
    assert detect(again, imgs[0]) == detect(model, imgs[0])


def test_load_rejects_foreign_files(tmp_path):
    p = tmp_path / "junk.npz"
    np.savez(p, a=np.zeros(3))
    with pytest.raises(ModelError, match="missing metadata"):
        load_detector(p)
    q = tmp_path / "text.npz"
    q.write_bytes(b"not an archive")
    with pytest.raises(ModelError):
        load_detector(q)


def test_load_rejects_mismatched_weights(tmp_path, trained):
    model, _, _, _ = trained
    path = tmp_path / "det.npz"
    save_detector(model, path)
    with np.load(path) as z:
        raw = {k: z[k] for k in z.files}
    raw["backbone.conv1.W"] = raw["backbone.conv1.W"][:, :1]
    np.savez(tmp_path / "bad.npz", **raw)
    with pytest.raises(ModelError, match="do not match"):
        load_detector(tmp_path / "bad.npz")
