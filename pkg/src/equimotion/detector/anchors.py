"""Anchor generation, matching, and box delta encoding for the proposal stage.

Boxes are (x, y, w, h) float arrays. Deltas use the standard
center-offset / log-size parameterization, so regression targets stay
well-scaled across anchor sizes.
"""

import numpy as np

from .. import kernels

LOG_SIZE_CLIP = 4.0  # |tw|,|th| clipped before exp during decode


def base_anchors(scales, ratios) -> np.ndarray:
    """(A,4) anchor sizes as (0, 0, w, h); ratio is height/width."""
    out = []
    for s in scales:
        for r in ratios:
            w = s / np.sqrt(r)
            h = s * np.sqrt(r)
            out.append((0.0, 0.0, w, h))
    return np.array(out, dtype=np.float64)


def anchor_grid(feat_h, feat_w, stride, anchors) -> np.ndarray:
    """All anchors placed at feature-cell centers -> (feat_h*feat_w*A, 4).

    Row order matches the RPN head layout: cell-major (row, col), then
    anchor index, so head outputs reshape onto this grid directly.
    """
    cy = (np.arange(feat_h, dtype=np.float64) + 0.5) * stride
    cx = (np.arange(feat_w, dtype=np.float64) + 0.5) * stride
    grid_cy, grid_cx = np.meshgrid(cy, cx, indexing="ij")
    centers = np.stack([grid_cx.ravel(), grid_cy.ravel()], axis=1)  # (cells, 2)
    sizes = anchors[:, 2:4]                                          # (A, 2)
    a = anchors.shape[0]
    cells = centers.shape[0]
    wh = np.broadcast_to(sizes[None, :, :], (cells, a, 2))
    cxy = np.broadcast_to(centers[:, None, :], (cells, a, 2))
    xy = cxy - wh / 2
    return np.concatenate([xy, wh], axis=2).reshape(cells * a, 4)


def encode_boxes(ref, target) -> np.ndarray:
    """Deltas taking reference boxes onto target boxes."""
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 4)
    target = np.asarray(target, dtype=np.float64).reshape(-1, 4)
    rc = ref[:, :2] + ref[:, 2:] / 2
    tc = target[:, :2] + target[:, 2:] / 2
    txy = (tc - rc) / ref[:, 2:]
    twh = np.log(target[:, 2:] / ref[:, 2:])
    return np.concatenate([txy, twh], axis=1)


def decode_boxes(ref, deltas) -> np.ndarray:
    """Apply deltas to reference boxes; log sizes are clipped before exp."""
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 4)
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1, 4)
    rc = ref[:, :2] + ref[:, 2:] / 2
    cxy = rc + deltas[:, :2] * ref[:, 2:]
    wh = ref[:, 2:] * np.exp(np.clip(deltas[:, 2:], -LOG_SIZE_CLIP, LOG_SIZE_CLIP))
    return np.concatenate([cxy - wh / 2, wh], axis=1)


def clip_boxes(boxes, width, height) -> np.ndarray:
    """Clip float boxes to image bounds, keeping at least 1px of size."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4).copy()
    x2 = np.clip(boxes[:, 0] + boxes[:, 2], 1.0, width)
    y2 = np.clip(boxes[:, 1] + boxes[:, 3], 1.0, height)
    boxes[:, 0] = np.clip(boxes[:, 0], 0.0, width - 1.0)
    boxes[:, 1] = np.clip(boxes[:, 1], 0.0, height - 1.0)
    boxes[:, 2] = np.maximum(x2 - boxes[:, 0], 1.0)
    boxes[:, 3] = np.maximum(y2 - boxes[:, 1], 1.0)
    return boxes


def match_anchors(anchors, gt_box, pos_iou=0.7, neg_iou=0.3):
    """Per-anchor labels against one ground-truth box.

    Returns (labels, ious): label 1 positive, 0 negative, -1 ignored.
    The highest-IoU anchor is always positive, so every image yields at
    least one regression target.
    """
    ious = kernels.iou_matrix(anchors, np.asarray(gt_box, dtype=np.float64).reshape(1, 4))[:, 0]
    labels = np.full(len(anchors), -1, dtype=np.int8)
    labels[ious < neg_iou] = 0
    labels[ious >= pos_iou] = 1
    labels[int(np.argmax(ious))] = 1
    return labels, ious
