"""Shape descriptors of a lesion mask: asymmetry, compactness, border
irregularity and maximum caliper diameter."""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from skimage.measure import find_contours

from .. import raster
from ..raster import EmptyMaskError


class DegenerateMaskError(ValueError):
    pass


def _require(m) -> np.ndarray:
    m = raster.as_mask(m)
    if not m.any():
        raise EmptyMaskError("shape feature of an empty mask")
    return m


def principal_axes(m) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(center_xy, axes)``; ``axes[:, k]`` is a unit eigenvector of the
    foreground second-moment matrix."""
    ys, xs = np.nonzero(m)
    pts = np.column_stack([xs, ys]).astype(np.float64)
    c = pts.mean(axis=0)
    d = pts - c
    cov = d.T @ d / len(pts)
    _, vecs = np.linalg.eigh(cov)
    return c, vecs


def reflect_mask(m, center, axis, radius: float):
    """Reflect ``m`` across the line through ``center`` along ``axis``.

    Evaluated on a square window around the center that is large enough to
    hold both the mask and its mirror image. Returns ``(window, mirrored)``.
    """
    h, w = m.shape
    half = int(np.ceil(radius)) + 2
    x0 = int(np.floor(center[0])) - half
    y0 = int(np.floor(center[1])) - half
    size = 2 * half + 2
    yy, xx = np.mgrid[y0:y0 + size, x0:x0 + size]

    def sample(x, y):
        xi = np.floor(x + 0.5).astype(np.int64)
        yi = np.floor(y + 0.5).astype(np.int64)
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        out = np.zeros(x.shape, dtype=bool)
        out[inside] = m[yi[inside], xi[inside]]
        return out

    dx = xx - center[0]
    dy = yy - center[1]
    proj = dx * axis[0] + dy * axis[1]
    rx = center[0] + 2 * proj * axis[0] - dx
    ry = center[1] + 2 * proj * axis[1] - dy
    return sample(xx.astype(np.float64), yy.astype(np.float64)), sample(rx, ry)


def asymmetry(m) -> float:
    """Mean mismatch between the mask and its mirror images across both
    principal axes, as a fraction in [0, 1]."""
    m = _require(m)
    c, axes = principal_axes(m)
    ys, xs = np.nonzero(m)
    radius = float(np.sqrt(((xs - c[0]) ** 2 + (ys - c[1]) ** 2).max()))
    n = float(np.count_nonzero(m))
    scores = []
    for k in range(2):
        win, mirrored = reflect_mask(m, c, axes[:, k], radius)
        scores.append(np.count_nonzero(win ^ mirrored) / (2.0 * n))
    return float(np.mean(scores))


def contour_length(m) -> float:
    """Length of the sub-pixel (marching squares) outline, holes included."""
    padded = np.pad(np.asarray(m, dtype=np.float64), 1)
    return float(sum(np.hypot(*np.diff(c, axis=0).T).sum()
                     for c in find_contours(padded, 0.5)))


def compactness(m) -> float:
    """Isoperimetric quotient P^2 / (4 pi A); about 1 for a disk.

    P is the marching-squares outline length. A boundary pixel count
    under-measures diagonal runs and would put a digital disk near 0.8.
    """
    m = _require(m)
    p = contour_length(m)
    return float(p * p / (4.0 * np.pi * raster.area(m)))


def radial_variance(m) -> float:
    """Variance of centroid-to-boundary distances over their squared mean."""
    m = _require(m)
    edge = raster.boundary(m)
    ys, xs = np.nonzero(edge)
    if len(xs) < 8:
        raise DegenerateMaskError("need at least 8 boundary pixels")
    cx, cy = raster.centroid(m)
    r = np.hypot(xs - cx, ys - cy)
    mu = r.mean()
    if mu == 0:
        raise DegenerateMaskError("boundary collapses onto the centroid")
    return float(r.var() / (mu * mu))


def _max_pairwise(pts: np.ndarray) -> float:
    best = 0.0
    for i in range(0, len(pts), 512):
        d = pts[i:i + 512, None, :] - pts[None, :, :]
        best = max(best, float(np.sqrt((d ** 2).sum(axis=2)).max()))
    return best


def feret_diameter(m) -> float:
    """Maximum distance between boundary pixel centers."""
    m = _require(m)
    ys, xs = np.nonzero(raster.boundary(m))
    pts = np.column_stack([xs, ys]).astype(np.float64)
    if len(pts) > 3:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass
    return _max_pairwise(pts)
