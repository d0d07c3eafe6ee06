"""Image refinement ahead of segmentation: sharpening and hair removal."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from . import raster

SHARPEN_KERNEL = np.array([[0, -1, 0], [-1, 5, -1], [0, -1, 0]], dtype=np.float64)


class DegenerateHairMaskError(ValueError):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    sharpen_enabled: bool = True
    hair_removal_enabled: bool = True
    hair_line_length: int = 9
    hair_angles: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)
    hair_threshold: int = 20
    inpaint_radius: int = 3
    # "hair_first" or "sharpen_first"
    order: str = "hair_first"

    def __post_init__(self):
        if self.hair_line_length < 3 or self.hair_line_length % 2 == 0:
            raise ValueError("hair_line_length must be odd and >= 3")
        if not 1 <= self.hair_threshold <= 254:
            raise ValueError("hair_threshold must lie in [1, 254]")
        if self.inpaint_radius < 1:
            raise ValueError("inpaint_radius must be >= 1")
        if not self.hair_angles:
            raise ValueError("hair_angles must not be empty")
        if self.order not in ("hair_first", "sharpen_first"):
            raise ValueError(f"unknown preprocessing order {self.order!r}")


def sharpen(img) -> np.ndarray:
    img = raster.as_image(img)
    src = img.astype(np.float64)
    if src.ndim == 2:
        out = ndi.convolve(src, SHARPEN_KERNEL, mode="nearest")
    else:
        out = np.stack(
            [ndi.convolve(src[..., c], SHARPEN_KERNEL, mode="nearest") for c in range(3)],
            axis=-1,
        )
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def hair_response(gray: np.ndarray, length: int, angles) -> np.ndarray:
    """Max over directions of (line closing - original).

    Closing fills dark structures thinner than the line, so thin dark hairs
    give a large response along every direction that crosses them.
    """
    g = gray.astype(np.int16)
    resp = np.zeros_like(g)
    for angle in angles:
        se = raster.line(length, angle)
        closed = ndi.grey_closing(g, footprint=se, mode="nearest")
        np.maximum(resp, closed - g, out=resp)
    return resp


def _inpaint(img: np.ndarray, hair: np.ndarray, radius: int) -> np.ndarray:
    out = img.copy()
    keep = (~hair).astype(np.float64)
    channels = img[..., None] if img.ndim == 2 else img
    todo = hair.copy()
    r = radius
    while todo.any():
        k = raster.disk(r).astype(np.float64)
        counts = ndi.convolve(keep, k, mode="constant", cval=0.0)
        ready = todo & (counts > 0)
        if ready.any():
            for c in range(channels.shape[2]):
                sums = ndi.convolve(channels[..., c].astype(np.float64) * keep, k,
                                    mode="constant", cval=0.0)
                vals = np.clip(np.rint(sums[ready] / counts[ready]), 0, 255).astype(np.uint8)
                if img.ndim == 2:
                    out[ready] = vals
                else:
                    out[..., c][ready] = vals
            todo &= ~ready
        r += 1
    return out


def remove_hair(img, cfg: PreprocessConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Detect dark thin hairs and fill them from surrounding skin.

    Returns ``(cleaned_image, hair_mask)``. Pixels outside the hair mask are
    returned untouched.
    """
    cfg = cfg or PreprocessConfig()
    img = raster.as_image(img)
    gray = raster.to_grayscale(img)
    resp = hair_response(gray, cfg.hair_line_length, cfg.hair_angles)
    hair = resp > cfg.hair_threshold
    if hair.any():
        hair = raster.dilate(hair, raster.disk(1))
    if hair.all():
        raise DegenerateHairMaskError("hair mask covers the whole image")
    if not hair.any():
        return img.copy(), hair
    return _inpaint(img, hair, cfg.inpaint_radius), hair


def preprocess(img, cfg: PreprocessConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Run hair removal and sharpening in the configured order."""
    cfg = cfg or PreprocessConfig()
    img = raster.as_image(img)
    hair = np.zeros(img.shape[:2], dtype=bool)
    if cfg.order == "sharpen_first" and cfg.sharpen_enabled:
        img = sharpen(img)
    if cfg.hair_removal_enabled:
        img, hair = remove_hair(img, cfg)
    if cfg.order == "hair_first" and cfg.sharpen_enabled:
        img = sharpen(img)
    return img, hair
