from .anchors import anchor_grid, base_anchors, clip_boxes, decode_boxes, encode_boxes, match_anchors
from .model import (
    FEATURE_STRIDE,
    Detection,
    DetectorConfig,
    DetectorModel,
    best_roi,
    detect,
    iou,
    load_detector,
    save_detector,
)
from .train import DetectorEvaluation, ImageEvaluation, evaluate_detector, train_detector

__all__ = [
    "FEATURE_STRIDE",
    "Detection",
    "DetectorConfig",
    "DetectorEvaluation",
    "DetectorModel",
    "ImageEvaluation",
    "anchor_grid",
    "base_anchors",
    "best_roi",
    "clip_boxes",
    "decode_boxes",
    "detect",
    "encode_boxes",
    "evaluate_detector",
    "iou",
    "load_detector",
    "match_anchors",
    "save_detector",
    "train_detector",
]
