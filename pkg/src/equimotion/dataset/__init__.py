from .geometry import (
    CLASSIFIER_SIDE,
    DETECTOR_HEIGHT,
    clamp_box,
    crop_and_resize,
    rescale_to_height,
    round_half_up,
    scale_box,
)
from .imageio import decode_image, load_image, save_image
from .manifest import (
    Annotation,
    BoundingBox,
    DatasetManifest,
    ImageRecord,
    box_from_list,
    load_manifest,
    save_manifest,
)
from .splits import SplitSpec, kfold_split, stratified_split, with_kfold_splits

__all__ = [
    "Annotation",
    "BoundingBox",
    "CLASSIFIER_SIDE",
    "DETECTOR_HEIGHT",
    "DatasetManifest",
    "ImageRecord",
    "SplitSpec",
    "box_from_list",
    "clamp_box",
    "crop_and_resize",
    "decode_image",
    "kfold_split",
    "load_image",
    "load_manifest",
    "rescale_to_height",
    "round_half_up",
    "save_image",
    "save_manifest",
    "scale_box",
    "stratified_split",
    "with_kfold_splits",
]
