"""Lesion segmentation by watershed, active contour, and their intersection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import raster
from .snake import (
    DegenerateContourError,
    EnergyWeights,
    SnakeConfig,
    evolve,
    initial_contour,
    rasterize,
    snake_energy,
    snake_segment,
)
from .watershed import NoLesionError, WatershedConfig, flood, watershed_segment

__all__ = [
    "DegenerateContourError",
    "EnergyWeights",
    "NoLesionError",
    "SegmentationDisagreementError",
    "SegmentationResult",
    "SnakeConfig",
    "WatershedConfig",
    "evolve",
    "flood",
    "initial_contour",
    "merge_core",
    "merge_masks",
    "rasterize",
    "segment",
    "snake_energy",
    "snake_segment",
    "watershed_segment",
]


class SegmentationDisagreementError(ValueError):
    pass


def merge_core(watershed, snake) -> np.ndarray:
    return raster.mask_and(snake, watershed)


def merge_masks(watershed, snake) -> np.ndarray:
    """Intersect both masks, then dilate, strip spurs, keep one solid blob."""
    core = merge_core(watershed, snake)
    if not core.any():
        raise SegmentationDisagreementError("watershed and snake masks do not overlap")
    m = raster.dilate(core, raster.disk(1))
    m = raster.remove_spurs(m, None)
    m = raster.largest_component(m, 8)
    return raster.fill_holes(m)


@dataclass
class SegmentationResult:
    watershed: np.ndarray
    snake: np.ndarray
    merged: np.ndarray
    contour: np.ndarray = field(repr=False)


def segment(gray, ws_cfg: WatershedConfig | None = None,
            snake_cfg: SnakeConfig | None = None) -> SegmentationResult:
    ws_cfg = ws_cfg or WatershedConfig()
    snake_cfg = snake_cfg or SnakeConfig()
    gray = raster.as_image(gray)
    ws = watershed_segment(gray, ws_cfg)
    init = initial_contour(gray, spacing=snake_cfg.spacing, sigma=ws_cfg.gaussian_sigma)
    pts, _ = evolve(gray, init, snake_cfg.weights, snake_cfg.max_iter,
                    snake_cfg.tol, snake_cfg.sigma)
    sn = raster.fill_holes(rasterize(pts, gray.shape))
    if not sn.any():
        raise DegenerateContourError("rasterized contour is empty")
    return SegmentationResult(ws, sn, merge_masks(ws, sn), pts)
