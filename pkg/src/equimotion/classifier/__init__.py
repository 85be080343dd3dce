from .bases import BASE_NAMES, BuiltBase, build_base
from .model import (
    ClassifierConfig,
    ClassifierModel,
    Prediction,
    apply_freeze_policy,
    build_classifier,
    load_classifier,
    predict,
    save_classifier,
)
from .train import EpochMetrics, TrainReport, train_classifier

__all__ = [
    "BASE_NAMES",
    "BuiltBase",
    "ClassifierConfig",
    "ClassifierModel",
    "EpochMetrics",
    "Prediction",
    "TrainReport",
    "apply_freeze_policy",
    "build_base",
    "build_classifier",
    "load_classifier",
    "predict",
    "save_classifier",
    "train_classifier",
]
