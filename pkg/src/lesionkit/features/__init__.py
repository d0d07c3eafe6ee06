"""The 73-value lesion descriptor: 3 shape, 44 co-occurrence, 2 coarseness
and 24 color features, plus the diameter reported separately."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .. import raster
from .color import CHANNELS, COLOR_STATS, color_stats
from .shape import asymmetry, compactness, feret_diameter, radial_variance
from .texture import (
    GLCM_STATS,
    OFFSET_ANGLES,
    OFFSETS,
    GlcmMatrix,
    InsufficientTextureError,
    coarseness,
    glcm,
    glcm_stats,
)

SHAPE_NAMES = ("asymmetry", "compactness", "radial_variance")
GLCM_NAMES = tuple(f"glcm_{stat}_{angle}" for angle in OFFSET_ANGLES for stat in GLCM_STATS)
COARSENESS_NAMES = ("coarseness_mean", "coarseness_std")
COLOR_NAMES = tuple(f"{ch}_{stat}" for stat in COLOR_STATS for ch in CHANNELS)
FEATURE_NAMES = SHAPE_NAMES + GLCM_NAMES + COARSENESS_NAMES + COLOR_NAMES

# the eight second-stage classifier inputs, in order
ANN_GLCM_STATS = ("mean", "correlation", "homogeneity", "contrast", "energy",
                  "kurtosis", "dissimilarity")
ANN_INPUT_NAMES = tuple(f"glcm_{s}_avg" for s in ANN_GLCM_STATS) + ("gray_skewness",)


def registry_hash(names: Iterable[str] = FEATURE_NAMES) -> str:
    return hashlib.sha256("\n".join(names).encode()).hexdigest()


@dataclass(frozen=True)
class FeatureConfig:
    glcm_levels: int = 16
    mm_per_pixel: float | None = None

    def __post_init__(self):
        if not 2 <= self.glcm_levels <= 256:
            raise ValueError("glcm_levels must lie in [2, 256]")


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(self.values)}")

    names = FEATURE_NAMES

    def __getitem__(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


@dataclass(frozen=True)
class LesionMeasurements:
    diameter_px: float
    diameter_mm: float | None = None


def ann_inputs(fv) -> np.ndarray:
    """Second-stage inputs: seven co-occurrence statistics averaged over the
    four offsets, then gray-channel skewness."""
    get = fv.__getitem__ if isinstance(fv, FeatureVector) else fv.get
    vals = [float(np.mean([get(f"glcm_{s}_{a}") for a in OFFSET_ANGLES])) for s in ANN_GLCM_STATS]
    vals.append(float(get("gray_skewness")))
    return np.array(vals, dtype=np.float64)


def assemble_features(img, m, cfg: FeatureConfig | None = None
                      ) -> tuple[FeatureVector, LesionMeasurements]:
    cfg = cfg or FeatureConfig()
    img = raster.as_image(img)
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    m = raster.as_mask(m)
    if m.shape != img.shape[:2]:
        raise raster.IncompatibleMasksError("mask and image dimensions differ")
    gray = raster.to_grayscale(img)

    values = [asymmetry(m), compactness(m), radial_variance(m)]
    for offset in OFFSETS:
        stats = glcm_stats(glcm(gray, m, offset, cfg.glcm_levels))
        values.extend(stats[s] for s in GLCM_STATS)
    values.extend(coarseness(gray, m))
    cstats = color_stats(img, m)
    for stat in COLOR_STATS:
        values.extend(cstats[ch][stat] for ch in CHANNELS)

    if not np.all(np.isfinite(values)):
        bad = [n for n, v in zip(FEATURE_NAMES, values) if not np.isfinite(v)]
        raise ValueError(f"non-finite features: {bad}")
    d = feret_diameter(m)
    mm = d * cfg.mm_per_pixel if cfg.mm_per_pixel is not None else None
    return FeatureVector(tuple(float(v) for v in values)), LesionMeasurements(d, mm)


def write_feature_csv(path, rows: Iterable[tuple[str, FeatureVector]]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(("id",) + FEATURE_NAMES)
        for rid, fv in rows:
            wr.writerow((rid,) + tuple(repr(v) for v in fv.values))


def read_feature_csv(path) -> list[tuple[str, FeatureVector]]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header[1:]) != FEATURE_NAMES:
            raise ValueError(f"{path}: feature header does not match the canonical order")
        return [(row[0], FeatureVector(tuple(float(v) for v in row[1:]))) for row in rd]


__all__ = [
    "ANN_INPUT_NAMES",
    "FEATURE_NAMES",
    "FeatureConfig",
    "FeatureVector",
    "GlcmMatrix",
    "InsufficientTextureError",
    "LesionMeasurements",
    "ann_inputs",
    "assemble_features",
    "asymmetry",
    "coarseness",
    "color_stats",
    "compactness",
    "feret_diameter",
    "glcm",
    "glcm_stats",
    "radial_variance",
    "read_feature_csv",
    "registry_hash",
    "write_feature_csv",
]
