"""Detector training and evaluation.

One epoch is one pass over the training images; each image takes one
optimizer step. The proposal stage trains against anchor matches and
the region stage trains on its own proposals (plus the ground-truth box
so every step has a positive), using detached backbone features.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DataError
from ..dataset.manifest import BoundingBox
from ..nn import Adam, binary_ce_with_logits, smooth_l1
from . import anchors as anchor_ops
from .model import FEATURE_STRIDE, DetectorConfig, DetectorModel, best_roi, detect, iou

# stage-two sampling caps per step
_ROI_POS_CAP = 8
_ROI_NEG_CAP = 8
_ROI_POS_IOU = 0.5
_NEG_SAMPLE_FLOOR = 16


def _check_samples(images, boxes, height):
    if len(images) == 0:
        raise DataError("empty training set")
    if len(images) != len(boxes):
        raise DataError("images and boxes differ in length")
    for i, (img, box) in enumerate(zip(images, boxes)):
        if img.shape[0] != height:
            raise DataError("image %d not at required height %d" % (i, height))
        if not isinstance(box, BoundingBox):
            raise DataError("image %d: box must be a BoundingBox" % i)
        if box.x + box.w > img.shape[1] or box.y + box.h > img.shape[0]:
            raise DataError("image %d: box extends outside the image" % i)


def _rpn_step(model, img, gt, rng):
    """Forward/backward through backbone + proposal head; returns loss parts
    and the (detached) feature map and decoded proposals for stage two."""
    feat = model.features(img, train=True)
    h = model.rpn_relu.forward(model.rpn_conv.forward(feat, train=True), train=True)
    cls_map = model.rpn_cls.forward(h, train=True)
    reg_map = model.rpn_reg.forward(h, train=True)
    _, fh, fw, _ = cls_map.shape
    logits = cls_map.reshape(-1)
    deltas = reg_map.reshape(-1, 4)
    grid = anchor_ops.anchor_grid(fh, fw, FEATURE_STRIDE, model.base_anchors)

    gt_arr = np.array(gt.as_list(), dtype=np.float64)
    labels, _ = anchor_ops.match_anchors(grid, gt_arr)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    keep_neg = min(len(neg), max(_NEG_SAMPLE_FLOOR, 3 * len(pos)))
    neg = rng.choice(neg, size=keep_neg, replace=False) if keep_neg < len(neg) else neg

    targets = (labels == 1).astype(np.float64)
    weights = np.zeros(len(labels))
    weights[pos] = 1.0
    weights[neg] = 1.0
    cls_loss, g_logits = binary_ce_with_logits(logits, targets, weights)

    t_pos = anchor_ops.encode_boxes(grid[pos], np.tile(gt_arr, (len(pos), 1)))
    reg_loss, g_pos = smooth_l1(deltas[pos], t_pos, normalizer=max(len(pos), 1))
    g_deltas = np.zeros_like(deltas)
    g_deltas[pos] = g_pos

    gh = model.rpn_cls.backward(g_logits.reshape(cls_map.shape))
    gh = gh + model.rpn_reg.backward(g_deltas.reshape(reg_map.shape).astype(reg_map.dtype))
    model.backbone.backward(model.rpn_conv.backward(model.rpn_relu.backward(gh)))
    return cls_loss, reg_loss, feat, logits, deltas, grid


def _roi_step(model, feat, logits, deltas, grid, gt, width, height, rng):
    """Train the region head on current proposals; features are detached."""
    cfg = model.config
    scores = logits  # ranking only; sigmoid is monotone
    boxes = anchor_ops.clip_boxes(anchor_ops.decode_boxes(grid, deltas), width, height)
    top = min(64, len(scores))
    order = np.argpartition(-scores, top - 1)[:top]
    keep = kernels.nms(boxes[order], scores[order].astype(np.float64), cfg.proposal_nms_iou)[:16]
    proposals = np.vstack([boxes[order][keep], np.array(gt.as_list(), dtype=np.float64)[None]])

    gt_arr = np.array([gt.as_list()], dtype=np.float64)
    ious = kernels.iou_matrix(proposals, gt_arr)[:, 0]
    pos = np.flatnonzero(ious >= _ROI_POS_IOU)
    neg = np.flatnonzero(ious < _ROI_POS_IOU)
    if len(pos) > _ROI_POS_CAP:
        pos = rng.choice(pos, size=_ROI_POS_CAP, replace=False)
    if len(neg) > _ROI_NEG_CAP:
        neg = rng.choice(neg, size=_ROI_NEG_CAP, replace=False)
    sel = np.concatenate([pos, neg])
    sample = proposals[sel]

    roi_logits, roi_deltas = model.score_rois(feat, sample, train=True)
    targets = np.zeros(len(sel))
    targets[: len(pos)] = 1.0
    cls_loss, g_cls = binary_ce_with_logits(roi_logits, targets)

    t_pos = anchor_ops.encode_boxes(sample[: len(pos)], np.tile(gt_arr[0], (len(pos), 1)))
    reg_loss, g_pos = smooth_l1(roi_deltas[: len(pos)], t_pos, normalizer=max(len(pos), 1))
    g_reg = np.zeros_like(roi_deltas)
    g_reg[: len(pos)] = g_pos

    gh = model.roi_cls.backward(g_cls.reshape(-1, 1).astype(roi_deltas.dtype))
    gh = gh + model.roi_reg.backward(g_reg.astype(roi_deltas.dtype))
    model.roi_head.backward(gh)  # input grad discarded: features stay frozen here
    return cls_loss, reg_loss


def train_detector(images, boxes, config: DetectorConfig):
    """Fit a detector on (image, ground-truth box) pairs.

    Returns (model, loss_curve) where loss_curve holds the mean combined
    loss per epoch. epochs=0 leaves the freshly initialized model as-is.
    """
    _check_samples(images, boxes, config.image_height)
    model = DetectorModel(config)
    opt = Adam(model.params(), lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)
    curve = []
    for _ in range(config.epochs):
        order = rng.permutation(len(images))
        total = 0.0
        for i in order:
            img, gt = images[i], boxes[i]
            height, width = img.shape[:2]
            opt.zero_grad()
            c1, r1, feat, logits, deltas, grid = _rpn_step(model, img, gt, rng)
            c2, r2 = _roi_step(model, feat, logits, deltas, grid, gt, width, height, rng)
            opt.step()
            total += c1 + r1 + c2 + r2
        curve.append(total / len(images))
    return model, curve


@dataclass(frozen=True)
class ImageEvaluation:
    index: int
    detections: int
    iou: "float | None"  # best ROI vs truth; None when nothing detected
    correct: bool


@dataclass(frozen=True)
class DetectorEvaluation:
    precision: "float | None"  # None when no image produced a detection
    recall: float
    per_image: tuple

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "per_image": [
                {"index": r.index, "detections": r.detections, "iou": r.iou, "correct": r.correct}
                for r in self.per_image
            ],
        }


def evaluate_detector(model, images, boxes, iou_threshold: float = 0.5) -> DetectorEvaluation:
    """Score best-ROI picks against ground truth.

    A picture counts as correct when a best ROI exists and overlaps the
    truth at or above the threshold. Precision is correct over pictures
    with any detection; recall is correct over all pictures.
    """
    if len(images) == 0:
        raise DataError("empty validation set")
    if len(images) != len(boxes):
        raise DataError("images and boxes differ in length")
    results = []
    correct = 0
    with_det = 0
    for idx, (img, gt) in enumerate(zip(images, boxes)):
        dets = detect(model, img)
        best = best_roi(dets)
        if best is None:
            results.append(ImageEvaluation(idx, 0, None, False))
            continue
        with_det += 1
        overlap = iou(best.box, gt)
        ok = overlap >= iou_threshold
        correct += int(ok)
        results.append(ImageEvaluation(idx, len(dets), overlap, ok))
    precision = correct / with_det if with_det else None
    return DetectorEvaluation(precision, correct / len(images), tuple(results))
