"""End-to-end inference: rescale, detect, map back, crop, classify.

The ROI reported to callers lives in ORIGINAL image coordinates; the
classifier crop is taken from the original-resolution image so the
150x150 input keeps full detail rather than being blown up from the
detector-height copy.
"""

import json
import time
from dataclasses import dataclass

from .classifier.model import PREPROCESSING, ClassifierModel, Prediction
from .classifier.model import predict as classify
from .dataset.geometry import clamp_box, crop_and_resize, rescale_to_height, scale_box
from .dataset.manifest import BoundingBox
from .detector.model import DetectorModel, best_roi, detect
from .errors import ModelError, NoRoiError


@dataclass(frozen=True)
class PipelineResult:
    """One inference outcome; `roi` is in original image coordinates."""

    roi: BoundingBox
    detection_score: float
    prediction: Prediction
    timings: dict  # stage -> milliseconds


def infer(detector: DetectorModel, classifier: ClassifierModel, image) -> PipelineResult:
    """Run the staged flow on one decoded RGB image.

    rescale to detector height -> detect -> best ROI -> map the box back
    through 1/scale -> crop-and-resize from the original image ->
    classify. Raises NoRoiError when nothing clears the detector's
    score threshold.
    """
    if classifier.preprocessing != PREPROCESSING:
        raise ModelError(
            "classifier preprocessing %r not supported by this pipeline"
            % classifier.preprocessing)
    timings = {}
    t0 = time.perf_counter()
    rescaled, factor = rescale_to_height(image, detector.config.image_height)
    timings["rescale_ms"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    detections = detect(detector, rescaled)
    best = best_roi(detections)
    timings["detect_ms"] = (time.perf_counter() - t0) * 1000
    if best is None:
        raise NoRoiError("no region of interest above the score threshold")

    t0 = time.perf_counter()
    mapped = scale_box(best.box, 1.0 / factor)
    height, width = image.shape[:2]
    roi = clamp_box(mapped.x, mapped.y, mapped.w, mapped.h, width, height)
    crop = crop_and_resize(image, roi, classifier.config.input_side)
    timings["crop_ms"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    prediction = classify(classifier, crop)
    timings["classify_ms"] = (time.perf_counter() - t0) * 1000
    timings["total_ms"] = sum(timings.values())
    return PipelineResult(roi, best.score, prediction, timings)


def result_to_dict(result: PipelineResult, model_versions=None, include_timings=False) -> dict:
    """Canonical wire form of a PipelineResult.

    Timings are excluded by default so two runs over the same input
    serialize identically; model_versions is attached when given (the
    service includes it, offline comparisons pass the same mapping).
    """
    out = {
        "roi": result.roi.as_list(),
        "score": result.detection_score,
        "label": result.prediction.label.label,
        "probabilities": list(result.prediction.probabilities),
    }
    if model_versions is not None:
        out["model_versions"] = dict(model_versions)
    if include_timings:
        out["timings"] = dict(result.timings)
    return out


def result_to_json_bytes(result: PipelineResult, model_versions=None) -> bytes:
    """Deterministic serialization used verbatim as the service body."""
    return json.dumps(result_to_dict(result, model_versions),
                      sort_keys=True, separators=(",", ":")).encode()
