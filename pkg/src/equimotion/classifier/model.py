"""Four-way emotion classifier: conv base + flatten + dense head.

The head is always flatten -> dense(256) -> relu -> dense(128) -> relu
-> dense(4); softmax happens at prediction / loss time so the model
itself emits logits. The freeze policy marks everything up to (but not
including) the base's last block as non-trainable.
"""

import io
import json
import dataclasses
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, ModelError
from ..ethogram import EmotionLabel
from ..nn import Dense, Flatten, ReLU, Sequential, load_params_state, params_state, softmax
from .bases import BASE_NAMES, BuiltBase, build_base

FORMAT_VERSION = 1
PREPROCESSING = "rgb_pm1"  # uint8 RGB scaled to [-1, 1]


@dataclass(frozen=True)
class ClassifierConfig:
    """Classifier hyperparameters; defaults match the reference training."""

    base: str = "vgg16"
    input_side: int = 150
    head_widths: tuple = (256, 128)
    num_classes: int = 4
    epochs: int = 40
    learning_rate: float = 1e-4
    batch_size: int = 16
    width_multiplier: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "head_widths", tuple(int(v) for v in self.head_widths))
        if self.base not in BASE_NAMES:
            raise DataError("unknown base %r (available: %s)" % (self.base, ", ".join(BASE_NAMES)))
        if len(self.head_widths) != 2 or any(v < 1 for v in self.head_widths):
            raise DataError("head_widths must be exactly two positive entries")
        if self.num_classes != 4:
            raise DataError("num_classes must be 4")
        if self.input_side < 1:
            raise DataError("input_side must be >= 1")
        if self.epochs < 0:
            raise DataError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        if self.width_multiplier <= 0:
            raise DataError("width_multiplier must be positive")

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["head_widths"] = list(self.head_widths)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class Prediction:
    """Class probabilities plus the argmax label (first index on ties)."""

    probabilities: tuple
    label: EmotionLabel

    def as_dict(self) -> dict:
        return {"label": self.label.label, "probabilities": list(self.probabilities)}


def preprocess(images: np.ndarray) -> np.ndarray:
    """uint8 RGB batch -> float32 in [-1, 1]."""
    return images.astype(np.float32) / 127.5 - 1.0


class ClassifierModel:
    """Base blocks + dense head; parameters carry the trainability mask."""

    def __init__(self, config: ClassifierConfig):
        self.config = config
        self.preprocessing = PREPROCESSING
        rng = np.random.default_rng(config.seed)
        self.base: BuiltBase = build_base(
            config.base, config.input_side, config.width_multiplier, rng)
        w1, w2 = config.head_widths
        self.head = Sequential("head", [
            Flatten("head.flatten"),
            Dense("head.fc1", self.base.feature_size, w1, rng=rng),
            ReLU("head.relu1"),
            Dense("head.fc2", w1, w2, rng=rng),
            ReLU("head.relu2"),
            Dense("head.out", w2, config.num_classes, rng=rng),
        ])

    def params(self):
        return self.base.params() + self.head.params()

    def head_param_count(self) -> int:
        return sum(p.value.size for p in self.head.params())

    def freeze_mask(self) -> dict:
        """Parameter name -> trainable flag."""
        return {p.name: bool(p.trainable) for p in self.params()}

    def check_input(self, images: np.ndarray):
        side = self.config.input_side
        if images.ndim != 4 or images.shape[1:] != (side, side, 3):
            got = "x".join(str(v) for v in images.shape[1:3]) if images.ndim == 4 else str(images.shape)
            raise DataError("expected %dx%d RGB inputs, got %s" % (side, side, got))

    def forward(self, images: np.ndarray, train: bool = False) -> np.ndarray:
        """uint8 image batch -> logits (N, 4)."""
        self.check_input(images)
        x = self.base.forward(preprocess(images), train=train)
        return self.head.forward(x, train=train)


def build_classifier(config: ClassifierConfig) -> ClassifierModel:
    return ClassifierModel(config)


def apply_freeze_policy(model: ClassifierModel) -> ClassifierModel:
    """Mark only the base's last block and the head as trainable.

    Idempotent; returns the same (mutated) model instance.
    """
    if not model.base.blocks:
        raise ModelError("base %r exposes no block metadata" % model.base.name)
    for _, block in model.base.blocks[:-1]:
        for p in block.params():
            p.trainable = False
    for p in model.base.blocks[-1][1].params():
        p.trainable = True
    for p in model.head.params():
        p.trainable = True
    return model


def predict(model: ClassifierModel, roi_image: np.ndarray) -> Prediction:
    """Classify one crop; deterministic, ties resolve to canonical order."""
    if roi_image.ndim != 3:
        raise DataError("expected a single (side, side, 3) image")
    logits = model.forward(roi_image[None])[0].astype(np.float64)
    probs = softmax(logits)
    return Prediction(tuple(float(p) for p in probs), EmotionLabel(int(np.argmax(probs))))


def save_classifier(model: ClassifierModel, path) -> None:
    """Write weights, config, preprocessing tag, and freeze mask to npz."""
    state = params_state_of(model)
    meta = {
        "kind": "classifier",
        "format_version": FORMAT_VERSION,
        "config": model.config.as_dict(),
        "preprocessing": model.preprocessing,
        "freeze_mask": model.freeze_mask(),
    }
    buf = io.BytesIO()
    np.savez(buf, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **state)
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def params_state_of(model: ClassifierModel) -> dict:
    state = {}
    for _, block in model.base.blocks:
        state.update(params_state(block))
    state.update(params_state(model.head))
    return state


def load_classifier(path) -> ClassifierModel:
    try:
        with np.load(path) as z:
            raw = {k: z[k] for k in z.files}
    except (OSError, ValueError) as e:
        raise ModelError("cannot read classifier file: %s" % e) from e
    if "__meta__" not in raw:
        raise ModelError("not a classifier file: missing metadata")
    meta = json.loads(bytes(raw.pop("__meta__")).decode())
    if meta.get("kind") != "classifier":
        raise ModelError("not a classifier file: kind=%r" % meta.get("kind"))
    if meta.get("format_version") != FORMAT_VERSION:
        raise ModelError("unsupported classifier format version %r" % meta.get("format_version"))
    model = ClassifierModel(ClassifierConfig.from_dict(meta["config"]))
    model.preprocessing = meta.get("preprocessing", PREPROCESSING)
    try:
        for _, block in model.base.blocks:
            load_params_state(block, raw)
        load_params_state(model.head, raw)
    except (KeyError, ValueError) as e:
        raise ModelError("classifier weights do not match config: %s" % e) from e
    mask = meta.get("freeze_mask", {})
    for p in model.params():
        if p.name in mask:
            p.trainable = bool(mask[p.name])
    return model
