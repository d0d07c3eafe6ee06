"""Color statistics over eight channels: R, G, B, H, S, V, CIE L*, gray."""
from __future__ import annotations

import numpy as np
from skimage.color import rgb2hsv, rgb2lab

from .. import raster

CHANNELS = ("red", "green", "blue", "hue", "saturation", "value", "lightness", "gray")
COLOR_STATS = ("variance", "entropy", "skewness")

# native range of each channel, used for the 256-bin entropy histogram
_RANGES = {
    "red": 256.0, "green": 256.0, "blue": 256.0, "gray": 256.0,
    "hue": 1.0, "saturation": 1.0, "value": 1.0, "lightness": 100.0,
}


def channel_planes(rgb) -> dict[str, np.ndarray]:
    rgb = raster.as_image(rgb)
    if rgb.ndim != 3:
        raise ValueError("color statistics need a 3-channel image")
    f = rgb.astype(np.float64)
    hsv = rgb2hsv(rgb)
    lab = rgb2lab(rgb)  # D65 white point
    return {
        "red": f[..., 0],
        "green": f[..., 1],
        "blue": f[..., 2],
        "hue": hsv[..., 0],
        "saturation": hsv[..., 1],
        "value": hsv[..., 2],
        "lightness": lab[..., 0],
        "gray": raster.to_grayscale(rgb).astype(np.float64),
    }


def entropy_bits(values: np.ndarray, span: float) -> float:
    bins = np.clip(np.floor(values * (256.0 / span)), 0, 255).astype(np.int64)
    counts = np.bincount(bins, minlength=256)
    p = counts[counts > 0] / len(values)
    return float(-(p * np.log2(p)).sum())


def variance_skewness(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0 or np.ptp(values) == 0:
        return 0.0, 0.0
    mu = values.mean()
    d = values - mu
    var = float((d * d).mean())
    skew = float((d ** 3).mean()) / var ** 1.5
    return var, skew


def circular_center(hue: np.ndarray) -> np.ndarray:
    """Hue (in turns) re-expressed as signed offsets from its circular mean."""
    ang = 2 * np.pi * hue
    mean = np.arctan2(np.sin(ang).mean(), np.cos(ang).mean()) / (2 * np.pi)
    return np.mod(hue - mean + 0.5, 1.0) - 0.5


def color_stats(rgb, m) -> dict[str, dict[str, float]]:
    """``{channel: {"variance", "entropy", "skewness"}}`` over in-mask pixels."""
    m = raster.as_mask(m)
    if not m.any():
        raise raster.EmptyMaskError("color statistics of an empty mask")
    planes = channel_planes(rgb)
    out = {}
    for name in CHANNELS:
        vals = planes[name][m]
        moments_of = circular_center(vals) if name == "hue" else vals
        var, skew = variance_skewness(moments_of)
        out[name] = {"variance": var, "entropy": entropy_bits(vals, _RANGES[name]),
                     "skewness": skew}
    return out
