"""Agreement between a computed mask and ground truth: SSIM, Jaccard, Dice.

All three are reported as percentages.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .raster import IncompatibleMasksError, as_mask


@dataclass(frozen=True)
class SimilarityConfig:
    dynamic_range: float = 255.0
    k1: float = 0.01
    k2: float = 0.03
    window: int = 11
    sigma: float = 1.5

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.dynamic_range <= 0 or self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("stabilizers must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


@dataclass(frozen=True)
class SimilarityReport:
    ssim_pct: float
    jaccard_pct: float
    dice_pct: float


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - size // 2
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _as_intensity(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == bool:
        return np.where(arr, 255.0, 0.0)
    if arr.ndim != 2:
        raise ValueError("ssim expects single-channel inputs")
    return arr.astype(np.float64)


def _filter(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    out = ndi.correlate1d(img, k, axis=0, mode="reflect")
    return ndi.correlate1d(out, k, axis=1, mode="reflect")


def ssim_map(a, b, cfg: SimilarityConfig | None = None) -> np.ndarray:
    """Per-pixel SSIM with Gaussian-weighted local statistics.

    Borders are handled by symmetric reflection. Boolean masks are evaluated
    as 0/255 images.
    """
    cfg = cfg or SimilarityConfig()
    x, y = _as_intensity(a), _as_intensity(b)
    if x.shape != y.shape:
        raise IncompatibleMasksError(f"image shapes differ: {x.shape} vs {y.shape}")
    k = gaussian_window(cfg.window, cfg.sigma)
    mx, my = _filter(x, k), _filter(y, k)
    sxx = _filter(x * x, k) - mx * mx
    syy = _filter(y * y, k) - my * my
    sxy = _filter(x * y, k) - mx * my
    c1, c2 = cfg.c1, cfg.c2
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def ssim(a, b, cfg: SimilarityConfig | None = None) -> float:
    return float(max(-100.0, 100.0 * ssim_map(a, b, cfg).mean()))


def _counts(a, b) -> tuple[int, int, int]:
    a, b = as_mask(a), as_mask(b)
    if a.shape != b.shape:
        raise IncompatibleMasksError(f"mask shapes differ: {a.shape} vs {b.shape}")
    common = int(np.count_nonzero(a & b))
    only_a = int(np.count_nonzero(a & ~b))
    only_b = int(np.count_nonzero(b & ~a))
    return common, only_a, only_b


def jaccard(a, b) -> float:
    common, only_a, only_b = _counts(a, b)
    total = common + only_a + only_b
    if total == 0:
        return 100.0
    return 100.0 * common / total


def dice(a, b) -> float:
    common, only_a, only_b = _counts(a, b)
    total = 2 * common + only_a + only_b
    if total == 0:
        return 100.0
    return 100.0 * 2 * common / total


def compare(mask, truth, cfg: SimilarityConfig | None = None) -> SimilarityReport:
    return SimilarityReport(ssim(as_mask(mask), as_mask(truth), cfg), jaccard(mask, truth),
                            dice(mask, truth))
