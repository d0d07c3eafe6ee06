"""Marker-controlled immersion watershed."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi
from skimage.filters import threshold_otsu

from .. import raster

DIVIDE = 0
_UNSEEN = -1

LESION = 1
BACKGROUND = 2


class NoLesionError(ValueError):
    pass


@dataclass(frozen=True)
class WatershedConfig:
    gaussian_sigma: float = 2.0
    marker_erosion: int = 5
    connectivity: int = 8

    def __post_init__(self):
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be > 0")
        if self.marker_erosion < 1:
            raise ValueError("marker_erosion must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def _neighbor_offsets(connectivity: int) -> list[tuple[int, int]]:
    if connectivity == 4:
        return [(-1, 0), (0, -1), (0, 1), (1, 0)]
    return [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx]


def flood(surface, markers, connectivity: int = 8) -> np.ndarray:
    """Immersion flooding of an integer relief from labelled markers.

    ``markers`` holds positive labels on seed pixels and 0 elsewhere. Levels
    are visited in increasing order; within a level, basins grow one
    geodesic ring at a time over pixels at or below the level. A pixel reached
    by two different basins in the same ring becomes a divide (label 0), as do
    pixels never reached.
    """
    surface = np.asarray(surface)
    markers = np.asarray(markers)
    if surface.shape != markers.shape or surface.ndim != 2:
        raise ValueError("surface and markers must be 2-D arrays of equal shape")
    h, w = surface.shape
    n = h * w
    alt = surface.ravel().tolist()
    lab = np.where(markers.ravel() > 0, markers.ravel(), _UNSEEN).astype(np.int64).tolist()

    offs = _neighbor_offsets(connectivity)
    nbrs: list[list[int]] = [None] * n  # type: ignore[list-item]
    for p in range(n):
        y, x = divmod(p, w)
        nbrs[p] = [(y + dy) * w + x + dx for dy, dx in offs
                   if 0 <= y + dy < h and 0 <= x + dx < w]

    order = sorted(range(n), key=alt.__getitem__)
    i = 0
    while i < n:
        level = alt[order[i]]
        j = i
        while j < n and alt[order[j]] == level:
            j += 1
        ring = [p for p in order[i:j]
                if lab[p] == _UNSEEN and any(lab[q] > 0 for q in nbrs[p])]
        while ring:
            decided = []
            for p in ring:
                seen = {lab[q] for q in nbrs[p] if lab[q] > 0}
                decided.append(seen.pop() if len(seen) == 1 else DIVIDE)
            grown = []
            for p, v in zip(ring, decided):
                lab[p] = v
                if v > 0:
                    grown.append(p)
            nxt = dict.fromkeys(
                q for p in grown for q in nbrs[p]
                if lab[q] == _UNSEEN and alt[q] <= level
            )
            ring = list(nxt)
        i = j

    out = np.array(lab, dtype=np.int64).reshape(h, w)
    out[out == _UNSEEN] = DIVIDE
    return out


def gradient_relief(gray, sigma: float) -> np.ndarray:
    """Gradient magnitude of the smoothed image, quantized to 0..255."""
    smooth = ndi.gaussian_filter(np.asarray(gray, dtype=np.float64), sigma, mode="nearest")
    gy, gx = np.gradient(smooth)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak <= 0:
        return np.zeros(mag.shape, dtype=np.int64)
    return np.rint(255.0 * mag / peak).astype(np.int64)


def dark_region(gray, sigma: float) -> np.ndarray:
    """Largest Otsu-dark component of the smoothed image."""
    smooth = ndi.gaussian_filter(np.asarray(gray, dtype=np.float64), sigma, mode="nearest")
    if smooth.max() - smooth.min() < 1e-9:
        raise NoLesionError("image is constant; no dark region")
    t = threshold_otsu(smooth)
    dark = smooth <= t
    if not dark.any() or dark.all():
        raise NoLesionError("Otsu threshold found no dark region")
    return raster.largest_component(dark, 8)


def _eroded_nonempty(m: np.ndarray, radius: int, border_value: int) -> np.ndarray:
    # back off the erosion radius until something survives
    for r in range(radius, 0, -1):
        out = ndi.binary_erosion(m, structure=raster.disk(r), border_value=border_value)
        if out.any():
            return out
    return m.copy()


def markers_from_image(gray, cfg: WatershedConfig) -> np.ndarray:
    lesion = dark_region(gray, cfg.gaussian_sigma)
    inner = _eroded_nonempty(lesion, cfg.marker_erosion, border_value=0)
    outer = _eroded_nonempty(~lesion, cfg.marker_erosion, border_value=1)
    markers = np.zeros(lesion.shape, dtype=np.int64)
    markers[outer] = BACKGROUND
    markers[inner] = LESION
    return markers


def smooth_boundary(m) -> np.ndarray:
    m = raster.dilate(m, raster.disk(1))
    m = raster.remove_spurs(m, None)
    m = raster.largest_component(m, 8)
    return raster.fill_holes(m)


def watershed_segment(gray, cfg: WatershedConfig | None = None) -> np.ndarray:
    cfg = cfg or WatershedConfig()
    gray = raster.as_image(gray)
    if gray.ndim != 2:
        raise ValueError("watershed_segment needs a single-channel image")
    markers = markers_from_image(gray, cfg)
    relief = gradient_relief(gray, cfg.gaussian_sigma)
    labels = flood(relief, markers, cfg.connectivity)
    lesion = labels == LESION
    if not lesion.any():
        raise NoLesionError("flooding produced an empty lesion basin")
    return smooth_boundary(lesion)
