"""Synthetic toy data for smoke tests and desk-scale runs.

The production dataset behind this system is private, so the repo ships
generators instead: high-contrast textured patches on dark noise for the
detector, and four visually separable 150x150 patterns (one per emotion
class) for the classifier. A combined scene generator places a class
pattern inside a detector patch for end-to-end runs.
"""

from __future__ import annotations

import os

import numpy as np

from ..ethogram import EmotionLabel
from .geometry import CLASSIFIER_SIDE, DETECTOR_HEIGHT
from .imageio import save_image
from .manifest import Annotation, BoundingBox, DatasetManifest, ImageRecord, save_manifest

# dominant color per class keeps the four patterns linearly separable
_CLASS_COLORS = {
    EmotionLabel.ALARMED: (235, 210, 40),   # yellow horizontal stripes
    EmotionLabel.ANNOYED: (225, 60, 50),    # red vertical stripes
    EmotionLabel.CURIOUS: (60, 210, 80),    # green checkerboard
    EmotionLabel.RELAXED: (70, 120, 230),   # blue gradient
}


def pattern_tile(label: EmotionLabel, height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """A bright class-specific texture tile with mild pixel noise."""
    color = np.array(_CLASS_COLORS[label], dtype=np.float64)
    yy, xx = np.mgrid[0:height, 0:width]
    period = max(6, min(height, width) // 8)
    if label is EmotionLabel.ALARMED:
        mask = (yy // period) % 2 == 0
    elif label is EmotionLabel.ANNOYED:
        mask = (xx // period) % 2 == 0
    elif label is EmotionLabel.CURIOUS:
        mask = ((yy // period) + (xx // period)) % 2 == 0
    else:
        mask = np.ones_like(yy, dtype=bool)
    img = np.where(mask[:, :, None], color[None, None, :], 40.0)
    if label is EmotionLabel.RELAXED:
        img = img * (0.6 + 0.4 * xx / max(width - 1, 1))[:, :, None]
    img = img + rng.normal(0, 6, size=img.shape)
    return img.clip(0, 255).astype(np.uint8)


def classifier_image(label: EmotionLabel, rng: np.random.Generator,
                     side: int = CLASSIFIER_SIDE) -> np.ndarray:
    return pattern_tile(label, side, side, rng)


def make_classifier_set(n_per_class: int, seed: int = 0, side: int = CLASSIFIER_SIDE):
    """(images (N,side,side,3) uint8, labels (N,) int) with classes interleaved."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for i in range(n_per_class):
        for label in EmotionLabel:
            images.append(classifier_image(label, rng, side))
            labels.append(int(label))
    return np.stack(images), np.array(labels, dtype=np.int64)


def detector_scene(rng: np.random.Generator, height: int = DETECTOR_HEIGHT,
                   width: int | None = None,
                   label: EmotionLabel | None = None):
    """Dark-noise scene with one bright patch; returns (image, box, label).

    The patch is filled with a class pattern (random class unless given),
    so the same scenes serve detector and end-to-end smoke runs.
    """
    width = width or round(height * 4 / 3)
    if label is None:
        label = EmotionLabel(int(rng.integers(0, 4)))
    img = rng.integers(0, 60, size=(height, width, 3), dtype=np.uint8).astype(np.uint8)
    pw = int(rng.integers(width // 4, width // 2))
    ph = int(rng.integers(height // 4, height // 2))
    px = int(rng.integers(0, width - pw))
    py = int(rng.integers(0, height - ph))
    img[py:py + ph, px:px + pw] = pattern_tile(label, ph, pw, rng)
    return img, BoundingBox(px, py, pw, ph), label


def make_detector_set(n: int, seed: int = 0, height: int = DETECTOR_HEIGHT,
                      width: int | None = None):
    """(images list, boxes list, labels list) of n synthetic scenes."""
    rng = np.random.default_rng(seed)
    images, boxes, labels = [], [], []
    for _ in range(n):
        img, box, label = detector_scene(rng, height=height, width=width)
        images.append(img)
        boxes.append(box)
        labels.append(label)
    return images, boxes, labels


def write_toy_dataset(directory, n_per_class: int, seed: int = 0,
                      height: int = DETECTOR_HEIGHT, width: int | None = None) -> str:
    """Write scene PNGs plus a ready manifest; returns the manifest path.

    Each image gets an annotation with its ground-truth patch box, the
    class label and the canonical cue profile for that class.
    """
    from ..ethogram import canonical_profile_table

    os.makedirs(directory, exist_ok=True)
    table = canonical_profile_table()
    rng = np.random.default_rng(seed)
    manifest = DatasetManifest()
    i = 0
    for _ in range(n_per_class):
        for label in EmotionLabel:
            img, box, _ = detector_scene(rng, height=height, width=width, label=label)
            name = f"scene_{i:04d}.png"
            save_image(img, os.path.join(directory, name))
            manifest.records.append(ImageRecord(
                id=f"scene_{i:04d}", uri=name, width=img.shape[1], height=img.shape[0]))
            manifest.annotations.append(Annotation(
                image_id=f"scene_{i:04d}", box=box, label=label, cues=table[label]))
            i += 1
    path = os.path.join(directory, "manifest.jsonl")
    save_manifest(manifest, path)
    return path
