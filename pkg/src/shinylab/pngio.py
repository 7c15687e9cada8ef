"""8-bit grayscale and 1-bit mask PNG I/O for stimulus images."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError


def save_gray(path, image: np.ndarray) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="L").save(Path(path))


def save_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.asarray(mask, dtype=bool)).convert("1").save(Path(path))


def load_gray(path) -> np.ndarray:
    try:
        with Image.open(Path(path)) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise FormatError(f"cannot read image {path}: {exc}") from exc


def load_mask(path) -> np.ndarray:
    return load_gray(path) > 127
