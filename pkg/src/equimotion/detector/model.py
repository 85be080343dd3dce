"""Two-stage head-and-neck detector.

A small shared conv backbone (stride 8) feeds a proposal head that
scores anchors and regresses box deltas. Surviving proposals are pooled
from the feature map and rescored by a second stage that also refines
the box. Detection is fully deterministic: no sampling at inference,
and all orderings carry explicit tie-breaks.
"""

import io
import json
import dataclasses
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DataError, ModelError
from ..dataset.geometry import clamp_box, round_half_up
from ..dataset.manifest import BoundingBox
from ..nn import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sequential, load_params_state, params_state, sigmoid
from . import anchors as anchor_ops

FORMAT_VERSION = 1
FEATURE_STRIDE = 8  # three 2x2 pools in the backbone


@dataclass(frozen=True)
class DetectorConfig:
    """Detector hyperparameters; defaults match the reference pipeline."""

    anchor_scales: tuple = (32, 64, 128)
    anchor_ratios: tuple = (0.5, 1.0, 2.0)
    proposal_nms_iou: float = 0.7
    score_threshold: float = 0.5
    epochs: int = 4000
    image_height: int = 200
    backbone_channels: tuple = (16, 32, 64)
    rpn_channels: int = 64
    roi_pool_size: int = 4
    roi_hidden: int = 128
    proposal_pre_nms: int = 300
    proposal_post_nms: int = 32
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "anchor_scales", tuple(float(s) for s in self.anchor_scales))
        object.__setattr__(self, "anchor_ratios", tuple(float(r) for r in self.anchor_ratios))
        object.__setattr__(self, "backbone_channels", tuple(int(c) for c in self.backbone_channels))
        if not self.anchor_scales or any(s <= 0 for s in self.anchor_scales):
            raise DataError("anchor_scales must be positive and non-empty")
        if not self.anchor_ratios or any(r <= 0 for r in self.anchor_ratios):
            raise DataError("anchor_ratios must be positive and non-empty")
        if not 0.0 < self.proposal_nms_iou < 1.0:
            raise DataError("proposal_nms_iou must lie in (0, 1)")
        if not 0.0 <= self.score_threshold <= 1.0:
            raise DataError("score_threshold must lie in [0, 1]")
        if self.epochs < 0:
            raise DataError("epochs must be >= 0")
        if self.image_height < FEATURE_STRIDE:
            raise DataError("image_height must be >= %d" % FEATURE_STRIDE)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["anchor_scales"] = list(self.anchor_scales)
        d["anchor_ratios"] = list(self.anchor_ratios)
        d["backbone_channels"] = list(self.backbone_channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class Detection:
    """One detected region: integer pixel box plus confidence."""

    box: BoundingBox
    score: float


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes."""
    m = kernels.iou_matrix(
        np.array([a.as_list()], dtype=np.float64),
        np.array([b.as_list()], dtype=np.float64),
    )
    return float(m[0, 0])


def preprocess(image: np.ndarray) -> np.ndarray:
    """uint8 RGB -> float32 in [-1, 1], batch axis added."""
    return (image.astype(np.float32) / 127.5 - 1.0)[None]


class DetectorModel:
    """Backbone + proposal head + region scoring head."""

    def __init__(self, config: DetectorConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        c1, c2, c3 = config.backbone_channels
        self.backbone = Sequential("backbone", [
            Conv2D("backbone.conv1", 3, c1, rng=rng),
            ReLU("backbone.relu1"),
            MaxPool2D("backbone.pool1"),
            Conv2D("backbone.conv2", c1, c2, rng=rng),
            ReLU("backbone.relu2"),
            MaxPool2D("backbone.pool2"),
            Conv2D("backbone.conv3", c2, c3, rng=rng),
            ReLU("backbone.relu3"),
            MaxPool2D("backbone.pool3"),
        ])
        a = len(config.anchor_scales) * len(config.anchor_ratios)
        self.num_anchors = a
        self.rpn_conv = Conv2D("rpn.conv", c3, config.rpn_channels, rng=rng)
        self.rpn_relu = ReLU("rpn.relu")
        self.rpn_cls = Conv2D("rpn.cls", config.rpn_channels, a, k=1, rng=rng)
        self.rpn_reg = Conv2D("rpn.reg", config.rpn_channels, 4 * a, k=1, rng=rng)
        # objectness starts pessimistic so untrained models propose nothing
        self.rpn_cls.b.value[:] = -2.0
        p = config.roi_pool_size
        self.roi_head = Sequential("roi", [
            Flatten("roi.flatten"),
            Dense("roi.fc", p * p * c3, config.roi_hidden, rng=rng),
            ReLU("roi.relu"),
        ])
        self.roi_cls = Dense("roi.cls", config.roi_hidden, 1, rng=rng)
        self.roi_reg = Dense("roi.reg", config.roi_hidden, 4, rng=rng)
        self.roi_cls.b.value[:] = -4.0
        self.base_anchors = anchor_ops.base_anchors(config.anchor_scales, config.anchor_ratios)

    def modules(self):
        return [self.backbone, self.rpn_conv, self.rpn_relu, self.rpn_cls,
                self.rpn_reg, self.roi_head, self.roi_cls, self.roi_reg]

    def params(self):
        out = []
        for m in self.modules():
            out.extend(m.params())
        return out

    # -- forward pieces ------------------------------------------------

    def features(self, image: np.ndarray, train: bool = False) -> np.ndarray:
        if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
            raise DataError("expected uint8 RGB image of shape (h, w, 3)")
        if image.shape[0] != self.config.image_height:
            raise DataError(
                "expected image height %d, got %d"
                % (self.config.image_height, image.shape[0]))
        return self.backbone.forward(preprocess(image), train=train)

    def rpn_forward(self, feat: np.ndarray, train: bool = False):
        """Returns (scores (n,), deltas (n,4), anchors (n,4)) over the grid."""
        h = self.rpn_relu.forward(self.rpn_conv.forward(feat, train=train), train=train)
        logits = self.rpn_cls.forward(h, train=train)
        deltas = self.rpn_reg.forward(h, train=train)
        _, fh, fw, _ = logits.shape
        grid = anchor_ops.anchor_grid(fh, fw, FEATURE_STRIDE, self.base_anchors)
        return logits.reshape(-1), deltas.reshape(-1, 4), grid

    def roi_pool(self, feat: np.ndarray, box) -> np.ndarray:
        """Adaptive max pool of the feature cells under one image-space box."""
        _, fh, fw, c = feat.shape
        x, y, w, h = (float(v) for v in box)
        x0 = int(np.clip(np.floor(x / FEATURE_STRIDE), 0, fw - 1))
        y0 = int(np.clip(np.floor(y / FEATURE_STRIDE), 0, fh - 1))
        x1 = int(np.clip(np.ceil((x + w) / FEATURE_STRIDE), x0 + 1, fw))
        y1 = int(np.clip(np.ceil((y + h) / FEATURE_STRIDE), y0 + 1, fh))
        region = feat[0, y0:y1, x0:x1, :]
        p = self.config.roi_pool_size
        rh, rw = region.shape[:2]
        out = np.empty((p, p, c), dtype=feat.dtype)
        for i in range(p):
            ys = (i * rh) // p
            ye = max(ys + 1, -((-(i + 1) * rh) // p))
            for j in range(p):
                xs = (j * rw) // p
                xe = max(xs + 1, -((-(j + 1) * rw) // p))
                out[i, j] = region[ys:ye, xs:xe].max(axis=(0, 1))
        return out

    def propose(self, feat: np.ndarray, width: int, height: int):
        """Top proposals after decode, clip, and NMS -> (boxes, scores)."""
        cfg = self.config
        logits, deltas, grid = self.rpn_forward(feat)
        scores = sigmoid(logits.astype(np.float64))
        boxes = anchor_ops.clip_boxes(anchor_ops.decode_boxes(grid, deltas), width, height)
        if len(scores) > cfg.proposal_pre_nms:
            keep = np.argpartition(-scores, cfg.proposal_pre_nms)[:cfg.proposal_pre_nms]
            boxes, scores = boxes[keep], scores[keep]
        keep = kernels.nms(boxes, scores, cfg.proposal_nms_iou)[:cfg.proposal_post_nms]
        return boxes[keep], scores[keep]

    def score_rois(self, feat: np.ndarray, boxes: np.ndarray, train: bool = False):
        """Second-stage logits and refinement deltas for given boxes."""
        pooled = np.stack([self.roi_pool(feat, b) for b in boxes])
        h = self.roi_head.forward(pooled, train=train)
        return self.roi_cls.forward(h, train=train).reshape(-1), self.roi_reg.forward(h, train=train)


def detect(model: DetectorModel, image: np.ndarray) -> list:
    """Run the full two-stage detector on one rescaled image.

    Returns detections sorted by descending score; equal scores order by
    smaller (x, y). Surviving boxes never overlap above the NMS
    threshold. Empty list when nothing clears score_threshold.
    """
    cfg = model.config
    height, width = image.shape[:2]
    feat = model.features(image)
    proposals, _ = model.propose(feat, width, height)
    if len(proposals) == 0:
        return []
    logits, deltas = model.score_rois(feat, proposals)
    scores = sigmoid(logits.astype(np.float64))
    refined = anchor_ops.clip_boxes(
        anchor_ops.decode_boxes(proposals, deltas), width, height)
    # round to integer pixel boxes first so NMS and the reported overlap
    # guarantee operate on the exact boxes callers receive
    int_boxes = np.empty_like(refined)
    for i, (bx, by, bw, bh) in enumerate(refined):
        x = round_half_up(bx)
        y = round_half_up(by)
        w = max(1, round_half_up(bw))
        h = max(1, round_half_up(bh))
        int_boxes[i] = clamp_box(x, y, w, h, width, height).as_list()
    keep = kernels.nms(int_boxes, scores, cfg.proposal_nms_iou)
    out = []
    for i in keep:
        if scores[i] >= cfg.score_threshold:
            x, y, w, h = (int(v) for v in int_boxes[i])
            out.append(Detection(BoundingBox(x, y, w, h), float(scores[i])))
    return out


def best_roi(detections) -> "Detection | None":
    """Highest-scoring detection; ties prefer smaller (x, y). None if empty."""
    best = None
    for d in detections:
        if best is None:
            best = d
            continue
        key = (-d.score, d.box.x, d.box.y)
        best_key = (-best.score, best.box.x, best.box.y)
        if key < best_key:
            best = d
    return best


def save_detector(model: DetectorModel, path) -> None:
    """Write weights plus config to a single npz file."""
    state = {}
    for m in model.modules():
        state.update(params_state(m))
    meta = {
        "kind": "detector",
        "format_version": FORMAT_VERSION,
        "config": model.config.as_dict(),
    }
    buf = io.BytesIO()
    np.savez(buf, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **state)
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def load_detector(path) -> DetectorModel:
    try:
        with np.load(path) as z:
            raw = {k: z[k] for k in z.files}
    except (OSError, ValueError) as e:
        raise ModelError("cannot read detector file: %s" % e) from e
    if "__meta__" not in raw:
        raise ModelError("not a detector file: missing metadata")
    meta = json.loads(bytes(raw.pop("__meta__")).decode())
    if meta.get("kind") != "detector":
        raise ModelError("not a detector file: kind=%r" % meta.get("kind"))
    if meta.get("format_version") != FORMAT_VERSION:
        raise ModelError("unsupported detector format version %r" % meta.get("format_version"))
    model = DetectorModel(DetectorConfig.from_dict(meta["config"]))
    try:
        for m in model.modules():
            load_params_state(m, raw)
    except (KeyError, ValueError) as e:
        raise ModelError("detector weights do not match config: %s" % e) from e
    return model
