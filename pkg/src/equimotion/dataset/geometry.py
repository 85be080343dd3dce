"""Geometric preprocessing: height rescaling, box scaling, ROI cropping.

All coordinate rounding uses round-half-up (floor(v + 0.5)); sizes are
floored at 1 pixel. This single rule keeps detector boxes, manifest
annotations and classifier crops aligned across the pipeline.
"""

import math

import numpy as np

from .. import kernels
from ..errors import DataError
from .manifest import BoundingBox

DETECTOR_HEIGHT = 200
CLASSIFIER_SIDE = 150


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def rescale_to_height(image: np.ndarray, target_height: int = DETECTOR_HEIGHT):
    """Resize to the target height keeping the aspect ratio.

    Returns (resized image, scale_factor) with
    scale_factor = target_height / original_height.
    """
    if image.ndim != 3:
        raise DataError(f"expected an (H,W,C) image, got shape {image.shape}")
    h, w = image.shape[:2]
    if h < 1 or w < 1:
        raise DataError("cannot rescale a zero-dimension image")
    if target_height < 1:
        raise DataError(f"target height must be >= 1, got {target_height}")
    factor = target_height / h
    out_w = max(1, round_half_up(w * factor))
    if target_height == h and out_w == w:
        return image.copy(), 1.0
    return kernels.bilinear_resize(image, target_height, out_w), factor


def scale_box(box: BoundingBox, factor: float) -> BoundingBox:
    """Scale every coordinate by `factor`, round half up, floor sizes at 1."""
    if factor <= 0:
        raise DataError(f"scale factor must be positive, got {factor}")
    return BoundingBox(
        x=round_half_up(box.x * factor),
        y=round_half_up(box.y * factor),
        w=max(1, round_half_up(box.w * factor)),
        h=max(1, round_half_up(box.h * factor)),
    )


def clamp_box(x: int, y: int, w: int, h: int, width: int, height: int) -> BoundingBox:
    """Clip raw (possibly out-of-range) coordinates to an image's bounds.

    Unlike BoundingBox itself this accepts negative origins, as produced
    by detector regression near image edges. Raises if no overlap remains.
    """
    x1 = min(max(int(x), 0), width)
    y1 = min(max(int(y), 0), height)
    x2 = min(int(x) + int(w), width)
    y2 = min(int(y) + int(h), height)
    if x2 - x1 < 1 or y2 - y1 < 1:
        raise DataError(f"box {[x, y, w, h]} lies outside a {width}x{height} image")
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def crop_and_resize(image: np.ndarray, box, side: int = CLASSIFIER_SIDE) -> np.ndarray:
    """Clamp the box to the image, crop it, and resize to side x side.

    `box` may be a BoundingBox or a raw (x, y, w, h) sequence (negative
    origins allowed; they clamp away). The crop is stretched to the
    square; aspect ratio inside the box is not preserved.
    """
    h, w = image.shape[:2]
    if isinstance(box, BoundingBox):
        clamped = box.clamped(w, h)
    else:
        bx, by, bw, bh = box
        clamped = clamp_box(bx, by, bw, bh, w, h)
    crop = image[clamped.y:clamped.y + clamped.h, clamped.x:clamped.x + clamped.w]
    if crop.shape[0] == side and crop.shape[1] == side:
        return crop.copy()
    return kernels.bilinear_resize(np.ascontiguousarray(crop), side, side)
