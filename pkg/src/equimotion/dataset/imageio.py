"""PNG/JPEG loading and saving as 8-bit RGB numpy arrays."""

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import DataError


def load_image(path) -> np.ndarray:
    """Decode an image file to an (H,W,3) uint8 RGB array."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError:
        raise DataError(f"image not found: {path}") from None
    except UnidentifiedImageError:
        raise DataError(f"cannot decode image: {path}") from None


def decode_image(data: bytes) -> np.ndarray:
    """Decode raw image bytes to an (H,W,3) uint8 RGB array."""
    import io

    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError):
        raise DataError("cannot decode image bytes") from None


def save_image(image: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(path)
