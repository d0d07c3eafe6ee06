"""Gray-level co-occurrence statistics and Tamura coarseness."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .. import raster

GLCM_STATS = (
    "mean",
    "variance",
    "correlation",
    "homogeneity",
    "contrast",
    "energy",
    "entropy",
    "dissimilarity",
    "kurtosis",
    "skewness",
    "max_probability",
)

# (dx, dy) with rows pointing down, and the angle label used in feature names
OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1))
OFFSET_ANGLES = (0, 45, 90, 135)

COARSENESS_SCALES = (1, 2, 3, 4, 5)
MIN_COARSENESS_BOX = 32


class InsufficientTextureError(ValueError):
    pass


@dataclass(frozen=True)
class GlcmMatrix:
    levels: int
    entries: np.ndarray
    offset: tuple[int, int]


def quantize(gray, levels: int) -> np.ndarray:
    """Uniform division of [0, 255] into ``levels`` bins."""
    return (np.asarray(gray, dtype=np.int64) * levels) // 256


def glcm_counts(gray, m, offset, levels: int) -> np.ndarray:
    """Symmetric co-occurrence counts over in-mask pixel pairs."""
    if not 2 <= levels <= 256:
        raise ValueError("levels must lie in [2, 256]")
    dx, dy = offset
    if dx == 0 and dy == 0:
        raise ValueError("offset must be nonzero")
    q = quantize(gray, levels)
    m = raster.as_mask(m)
    h, w = q.shape
    ys0, ys1 = max(0, -dy), min(h, h - dy)
    xs0, xs1 = max(0, -dx), min(w, w - dx)
    counts = np.zeros((levels, levels), dtype=np.int64)
    if ys0 >= ys1 or xs0 >= xs1:
        return counts
    a = q[ys0:ys1, xs0:xs1]
    b = q[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
    both = m[ys0:ys1, xs0:xs1] & m[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
    np.add.at(counts, (a[both], b[both]), 1)
    return counts + counts.T


def glcm(gray, m, offset=(1, 0), levels: int = 16) -> GlcmMatrix:
    counts = glcm_counts(gray, m, offset, levels)
    pairs = int(counts.sum()) // 2
    if pairs < 2:
        raise InsufficientTextureError(f"only {pairs} co-occurring pair(s) inside the mask")
    return GlcmMatrix(levels, counts / counts.sum(), tuple(offset))


def _moments(values: np.ndarray, p: np.ndarray) -> tuple[float, float, float, float]:
    mu = float((values * p).sum())
    d = values - mu
    var = float((d ** 2 * p).sum())
    if var <= 0.0:
        return mu, 0.0, 0.0, 0.0
    skew = float((d ** 3 * p).sum()) / var ** 1.5
    kurt = float((d ** 4 * p).sum()) / var ** 2 - 3.0
    return mu, var, skew, kurt


def glcm_stats(g: GlcmMatrix) -> dict[str, float]:
    """Haralick-style statistics; moments come from the row marginal."""
    p = g.entries
    idx = np.arange(g.levels, dtype=np.float64)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    marginal = p.sum(axis=1)
    mu, var, skew, kurt = _moments(idx, marginal)
    if var > 0:
        corr = float(((i - mu) * (j - mu) * p).sum()) / var
    else:
        corr = 1.0
    nz = p[p > 0]
    return {
        "mean": mu,
        "variance": var,
        "correlation": corr,
        "homogeneity": float((p / (1.0 + (i - j) ** 2)).sum()),
        "contrast": float(((i - j) ** 2 * p).sum()),
        "energy": float((p ** 2).sum()),
        "entropy": float(-(nz * np.log2(nz)).sum()),
        "dissimilarity": float((np.abs(i - j) * p).sum()),
        "kurtosis": kurt,
        "skewness": skew,
        "max_probability": float(p.max()),
    }


def _shift(a: np.ndarray, d: int, axis: int) -> np.ndarray:
    """``out[x] = a[x + d]`` along ``axis`` with edge replication."""
    n = a.shape[axis]
    idx = np.clip(np.arange(n) + d, 0, n - 1)
    return np.take(a, idx, axis=axis)


TIE_TOLERANCE = 1e-9


def coarseness_map(gray) -> np.ndarray:
    """Per-pixel best window size 2^k, ties to the smallest k."""
    g = np.asarray(gray, dtype=np.float64)
    responses = []
    for k in COARSENESS_SCALES:
        size = 2 ** k
        avg = ndi.uniform_filter(g, size=size, mode="mirror")
        half = size // 2
        eh = np.abs(_shift(avg, half, 1) - _shift(avg, -half, 1))
        ev = np.abs(_shift(avg, half, 0) - _shift(avg, -half, 0))
        responses.append(np.maximum(eh, ev))
    stack = np.stack(responses)
    # responses within rounding noise of the best count as ties
    near = stack >= stack.max(axis=0) - TIE_TOLERANCE
    best = np.argmax(near, axis=0)
    return 2.0 ** np.asarray(COARSENESS_SCALES)[best]


def coarseness(gray, m) -> tuple[float, float]:
    m = raster.as_mask(m)
    ys, xs = np.nonzero(m)
    if len(ys) == 0:
        raise InsufficientTextureError("empty mask")
    if ys.max() - ys.min() + 1 < MIN_COARSENESS_BOX or xs.max() - xs.min() + 1 < MIN_COARSENESS_BOX:
        raise InsufficientTextureError(
            f"mask bounding box smaller than {MIN_COARSENESS_BOX}x{MIN_COARSENESS_BOX}")
    vals = coarseness_map(gray)[m]
    return float(vals.mean()), float(vals.std())
