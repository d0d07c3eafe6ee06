"""Greedy parametric active contour.

The contour is a closed polygon of ``N`` points stored as an ``(N, 2)`` array
of ``(x, y)`` coordinates. Total energy per point ``i``::

    alpha * (mean_spacing - |v_i - v_{i-1}|)^2 / mean_spacing^2     continuity
  + beta  * |v_{i-1} - 2 v_i + v_{i+1}|^2 / mean_spacing^2          curvature
  - w_img * |grad I(v_i)|^2                                        edge attraction
  + w_con * |v_i - centroid|                                       balloon pressure

Dividing the internal terms by the squared mean spacing keeps them
independent of contour size; without it a one-pixel dent costs several
units and single-point greedy moves never beat the pressure term.

The gradient magnitude is computed on a Gaussian-smoothed image, normalized
by its maximum and sampled bilinearly. A positive ``w_con`` deflates the
contour, a negative one inflates it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage as ndi
from skimage.draw import polygon as draw_polygon

from .. import raster
from .watershed import NoLesionError, dark_region

MIN_POINTS = 8
MIN_AREA = 10.0
RESAMPLE_EVERY = 5

_STEPS = np.array([(0, 0)] + [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)
                              if dx or dy], dtype=np.float64)


class DegenerateContourError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyWeights:
    alpha: float = 1.0
    beta: float = 1.0
    w_img: float = 1.2
    w_con: float = 0.2

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.w_img < 0:
            raise ValueError("alpha, beta and w_img must be >= 0")


@dataclass(frozen=True)
class SnakeConfig:
    weights: EnergyWeights = EnergyWeights()
    max_iter: int = 300
    tol: float = 0.02
    sigma: float = 1.5
    spacing: float = 6.0


def validate_contour(points, shape) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("contour must be an (N, 2) array of (x, y) points")
    if len(pts) < MIN_POINTS:
        raise DegenerateContourError(f"contour needs >= {MIN_POINTS} points, got {len(pts)}")
    h, w = shape
    if (pts[:, 0] < 0).any() or (pts[:, 0] > w - 1).any() \
            or (pts[:, 1] < 0).any() or (pts[:, 1] > h - 1).any():
        raise ValueError("contour point outside image bounds")
    if (np.abs(pts - np.roll(pts, 1, axis=0)).sum(axis=1) == 0).any():
        raise ValueError("contour has consecutive duplicate points")
    return pts


def edge_field(gray, sigma: float) -> np.ndarray:
    """Normalized gradient magnitude in [0, 1]."""
    smooth = ndi.gaussian_filter(np.asarray(gray, dtype=np.float64), sigma, mode="nearest")
    gy, gx = np.gradient(smooth)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    return mag / peak if peak > 0 else mag


def _bilinear(field: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = field.shape
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = field[y0, x0] * (1 - fx) + field[y0, x1] * fx
    bot = field[y1, x0] * (1 - fx) + field[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def _energies(pts: np.ndarray, field: np.ndarray, w: EnergyWeights) -> np.ndarray:
    """Total energy for a batch of contours shaped ``(B, N, 2)``."""
    prev = np.roll(pts, 1, axis=1)
    nxt = np.roll(pts, -1, axis=1)
    d = np.sqrt(((pts - prev) ** 2).sum(axis=2))
    dbar = d.mean(axis=1, keepdims=True)
    scale = dbar[:, 0] ** 2
    cont = ((dbar - d) ** 2).sum(axis=1) / scale
    curv = ((prev - 2 * pts + nxt) ** 2).sum(axis=2).sum(axis=1) / scale
    g = _bilinear(field, pts[..., 0], pts[..., 1])
    img = -(g ** 2).sum(axis=1)
    c = pts.mean(axis=1, keepdims=True)
    con = np.sqrt(((pts - c) ** 2).sum(axis=2)).sum(axis=1)
    return w.alpha * cont + w.beta * curv + w.w_img * img + w.w_con * con


def snake_energy(points, gray, w: EnergyWeights | None = None, sigma: float = 1.5) -> float:
    w = w or EnergyWeights()
    gray = raster.as_image(gray)
    pts = validate_contour(points, gray.shape)
    return float(_energies(pts[None], edge_field(gray, sigma), w)[0])


def polygon_area(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def resample(points, n: int | None = None) -> np.ndarray:
    """Redistribute points at uniform arc length along the closed polygon."""
    pts = np.asarray(points, dtype=np.float64)
    n = n or len(pts)
    closed = np.vstack([pts, pts[:1]])
    seg = np.sqrt((np.diff(closed, axis=0) ** 2).sum(axis=1))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, s[-1], n, endpoint=False)
    return np.column_stack([np.interp(targets, s, closed[:, 0]),
                            np.interp(targets, s, closed[:, 1])])


def rasterize(points, shape) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    rr, cc = draw_polygon(pts[:, 1], pts[:, 0], shape=shape)
    out = np.zeros(shape, dtype=bool)
    out[rr, cc] = True
    return out


def circle(cx: float, cy: float, r: float, n: int, shape=None) -> np.ndarray:
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    pts = np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])
    if shape is not None:
        h, w = shape
        pts[:, 0] = np.clip(pts[:, 0], 0, w - 1)
        pts[:, 1] = np.clip(pts[:, 1], 0, h - 1)
    return pts


def initial_contour(gray, spacing: float = 6.0, sigma: float = 2.0) -> np.ndarray:
    """Circle around the dark region, or a centered circle if none is found."""
    gray = raster.as_image(gray)
    h, w = gray.shape
    try:
        dark = dark_region(gray, sigma)
        cx, cy = raster.centroid(dark)
        r = 1.2 * np.sqrt(raster.area(dark) / np.pi)
    except NoLesionError:
        cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
        r = 0.45 * min(w, h)
    n = int(np.clip(round(2 * np.pi * r / spacing), MIN_POINTS, 400))
    pts = circle(cx, cy, r, n, shape=gray.shape)
    # clipping can stack points on the border; drop consecutive duplicates
    keep = np.abs(pts - np.roll(pts, 1, axis=0)).sum(axis=1) > 1e-9
    pts = pts[keep]
    if len(pts) < MIN_POINTS:
        pts = circle((w - 1) / 2.0, (h - 1) / 2.0, 0.45 * min(w, h), 16)
    return pts


def _check_alive(pts: np.ndarray) -> None:
    if len(pts) < MIN_POINTS or polygon_area(pts) < MIN_AREA:
        raise DegenerateContourError("contour collapsed")


def evolve(gray, init, w: EnergyWeights | None = None, max_iter: int = 300,
           tol: float = 0.02, sigma: float = 1.5,
           on_iteration: Callable[[int, np.ndarray, float], None] | None = None):
    """Greedy minimization. Returns ``(points, energy_history)``.

    ``energy_history[0]`` is the initial energy; entry ``k`` is the energy
    after iteration ``k``.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    w = w or EnergyWeights()
    gray = raster.as_image(gray)
    h, wd = gray.shape
    pts = validate_contour(init, gray.shape).copy()
    _check_alive(pts)
    field = edge_field(gray, sigma)
    n = len(pts)
    energy = float(_energies(pts[None], field, w)[0])
    history = [energy]

    for it in range(1, max_iter + 1):
        moved = 0
        for i in range(n):
            cand = pts[i] + _STEPS
            ok = (cand[:, 0] >= 0) & (cand[:, 0] <= wd - 1) \
                & (cand[:, 1] >= 0) & (cand[:, 1] <= h - 1)
            ok &= np.abs(cand - pts[i - 1]).sum(axis=1) > 0
            ok &= np.abs(cand - pts[(i + 1) % n]).sum(axis=1) > 0
            ok[0] = True
            idx = np.flatnonzero(ok)
            batch = np.repeat(pts[None], len(idx), axis=0)
            batch[:, i] = cand[idx]
            e = _energies(batch, field, w)
            best = int(np.argmin(e))
            # strict decrease with a relative margin so reevaluation never goes up
            if idx[best] != 0 and e[best] < energy - 1e-12 * (1.0 + abs(energy)):
                pts[i] = cand[idx[best]]
                energy = float(_energies(pts[None], field, w)[0])
                moved += 1
        if it % RESAMPLE_EVERY == 0:
            re = resample(pts)
            if (np.abs(re - np.roll(re, 1, axis=0)).sum(axis=1) > 0).all():
                e_re = float(_energies(re[None], field, w)[0])
                if e_re <= energy:
                    pts, energy = re, e_re
        _check_alive(pts)
        history.append(energy)
        if on_iteration is not None:
            on_iteration(it, pts.copy(), energy)
        if moved < tol * n:
            break
    return pts, history


def snake_segment(gray, init, w: EnergyWeights | None = None, max_iter: int = 300,
                  tol: float = 0.02, sigma: float = 1.5) -> np.ndarray:
    gray = raster.as_image(gray)
    if gray.ndim != 2:
        raise ValueError("snake_segment needs a single-channel image")
    pts, _ = evolve(gray, init, w, max_iter, tol, sigma)
    mask = rasterize(pts, gray.shape)
    if not mask.any():
        raise DegenerateContourError("rasterized contour is empty")
    return mask
