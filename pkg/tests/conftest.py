"""Shared fixtures: small trained models reused across test files.

Training even toy models dominates test runtime, so the detector and
classifier pair is built once per session and shared by the pipeline,
CLI, and service tests.
"""

import numpy as np
import pytest

from equimotion.classifier import (
    ClassifierConfig,
    apply_freeze_policy,
    build_classifier,
    save_classifier,
    train_classifier,
)
from equimotion.dataset.geometry import crop_and_resize, rescale_to_height, scale_box
from equimotion.dataset.synthetic import detector_scene
from equimotion.detector import DetectorConfig, save_detector, train_detector
from equimotion.ethogram import EmotionLabel

DET_TOY = dict(image_height=96, backbone_channels=(8, 16, 32), rpn_channels=32,
               anchor_scales=(24, 48), anchor_ratios=(0.5, 1.0, 2.0))
CLF_TOY = dict(input_side=64, width_multiplier=0.25, epochs=25,
               learning_rate=3e-4, batch_size=8, seed=0)


@pytest.fixture(scope="session")
def toy_scenes():
    """Eight 192x256 scenes, two per class, with ground-truth boxes."""
    rng = np.random.default_rng(11)
    imgs, boxes, labels = [], [], []
    for _ in range(2):
        for label in EmotionLabel:
            img, box, _ = detector_scene(rng, height=192, width=256, label=label)
            imgs.append(img)
            boxes.append(box)
            labels.append(label)
    return imgs, boxes, labels


@pytest.fixture(scope="session")
def toy_models(toy_scenes):
    """(detector, classifier) trained to find and label the toy scenes."""
    imgs, boxes, labels = toy_scenes
    det_imgs, det_boxes = [], []
    for img, box in zip(imgs, boxes):
        small, factor = rescale_to_height(img, DET_TOY["image_height"])
        det_imgs.append(small)
        det_boxes.append(scale_box(box, factor))
    detector, _ = train_detector(det_imgs, det_boxes,
                                 DetectorConfig(epochs=200, seed=1, **DET_TOY))

    rng = np.random.default_rng(0)
    crops, crop_labels = [], []
    for img, box, label in zip(imgs, boxes, labels):
        for _ in range(3):  # jittered boxes so off-by-a-few detector crops classify too
            jx = int(rng.integers(-box.w // 8, box.w // 8 + 1))
            jy = int(rng.integers(-box.h // 8, box.h // 8 + 1))
            jittered = (box.x + jx, box.y + jy, box.w, box.h)
            crops.append(crop_and_resize(img, jittered, CLF_TOY["input_side"]))
            crop_labels.append(int(label))
    X = np.stack(crops)
    y = np.array(crop_labels)
    classifier = apply_freeze_policy(build_classifier(ClassifierConfig(**CLF_TOY)))
    train_classifier(classifier, (X, y), (X[:4], y[:4]))
    return detector, classifier


@pytest.fixture(scope="session")
def toy_model_files(toy_models, tmp_path_factory):
    """Directory holding the trained pair as loadable artifacts."""
    detector, classifier = toy_models
    d = tmp_path_factory.mktemp("models")
    save_detector(detector, d / "detector-toy.npz")
    save_classifier(classifier, d / "classifier-toy.npz")
    return d
