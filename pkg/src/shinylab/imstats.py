"""Image statistics over the object mask: specular coverage and mean intensity.

Coverage counts object pixels whose 8-bit tone-mapped intensity is strictly
above a threshold (default 50) and reports them as a fraction of all object
pixels; it weights every supra-threshold pixel equally, whereas the mean
intensity weights brighter pixels more heavily.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .render import BACKGROUND_GRAY, Stimulus

DEFAULT_THRESHOLD = 50


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    threshold: int
    object_pixels: int
    above_pixels: int


def _image_and_mask(image, mask):
    if isinstance(image, Stimulus):
        img = image.image
        msk = image.mask if mask is None else np.asarray(mask, dtype=bool)
    else:
        img = np.asarray(image)
        msk = infer_mask(img) if mask is None else np.asarray(mask, dtype=bool)
    if img.ndim != 2:
        raise DomainError(f"expected a 2-d grayscale image, got shape {img.shape}")
    if msk.shape != img.shape:
        raise DomainError("mask shape does not match image shape")
    if not msk.any():
        raise DomainError("object mask is empty")
    return img, msk


def infer_mask(image: np.ndarray, background: int = BACKGROUND_GRAY) -> np.ndarray:
    """Fallback mask for external images without one: pixels that differ
    from the uniform background constant. A heuristic; prefer a real mask."""
    return np.asarray(image) != background


def specular_coverage(image, mask=None, threshold: int = DEFAULT_THRESHOLD) -> CoverageResult:
    """Fraction of object pixels strictly brighter than the threshold.

    `image` may be a Stimulus (its own mask is used) or an 8-bit array with
    an explicit mask; absent both, the background-constant heuristic of
    infer_mask applies.
    """
    if not (0 <= threshold <= 255):
        raise DomainError(f"threshold must be an 8-bit value, got {threshold}")
    img, msk = _image_and_mask(image, mask)
    obj = img[msk]
    above = int(np.count_nonzero(obj > threshold))
    return CoverageResult(
        coverage=above / obj.size,
        threshold=threshold,
        object_pixels=int(obj.size),
        above_pixels=above,
    )


def mean_intensity(image, mask=None) -> float:
    """Arithmetic mean of the tone-mapped object-pixel intensities."""
    img, msk = _image_and_mask(image, mask)
    return float(img[msk].mean())
