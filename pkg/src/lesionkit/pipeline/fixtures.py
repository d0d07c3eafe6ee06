"""Deterministic synthetic lesions for exercising the pipeline without a
real dataset. Benign cases are round and evenly pigmented; malignant cases
have a lobed border and blotchy multi-colour pigment."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage as ndi

from ..raster import write_image, write_mask
from .dataset import MELANOMA, NON_MELANOMA

SKIN = np.array([226.0, 184.0, 162.0])
BENIGN_TONE = np.array([150.0, 102.0, 74.0])
MALIGNANT_TONES = np.array([
    [112.0, 70.0, 52.0],   # dark brown
    [48.0, 36.0, 34.0],    # near black
    [96.0, 104.0, 124.0],  # blue-grey
    [168.0, 118.0, 88.0],  # light brown
])


@dataclass(frozen=True)
class SyntheticLesion:
    image: np.ndarray
    mask: np.ndarray
    malignant: bool


def _skin(rng, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size] / size
    shade = 1.0 + 0.04 * (xx - 0.5) - 0.03 * (yy - 0.5)
    img = SKIN[None, None, :] * shade[..., None]
    return img + rng.normal(0.0, 3.0, img.shape)


def _polar(size: int, cx: float, cy: float):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return np.hypot(xx - cx, yy - cy), np.arctan2(yy - cy, xx - cx)


def benign_lesion(rng, size: int = 128) -> SyntheticLesion:
    c = size / 2 + rng.uniform(-4, 4, 2)
    a, b = rng.uniform(0.20, 0.25, 2) * size
    phi = rng.uniform(0, np.pi)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    u = (xx - c[0]) * np.cos(phi) + (yy - c[1]) * np.sin(phi)
    v = -(xx - c[0]) * np.sin(phi) + (yy - c[1]) * np.cos(phi)
    mask = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    img = _skin(rng, size)
    tone = BENIGN_TONE + rng.normal(0.0, 4.0, 3)
    img[mask] = tone + rng.normal(0.0, 3.0, (mask.sum(), 3))
    return SyntheticLesion(np.clip(np.rint(img), 0, 255).astype(np.uint8), mask, False)


def malignant_lesion(rng, size: int = 128) -> SyntheticLesion:
    c = size / 2 + rng.uniform(-4, 4, 2)
    r0 = rng.uniform(0.21, 0.26) * size
    rad, theta = _polar(size, c[0], c[1])
    edge = np.ones_like(theta)
    for k in range(3, 8):
        edge += rng.uniform(0.05, 0.11) * np.cos(k * theta + rng.uniform(0, 2 * np.pi))
    mask = rad <= r0 * edge
    mask = ndi.binary_fill_holes(mask)
    # blotches: smoothed noise fields pick a tone per pixel
    fields = np.stack([ndi.gaussian_filter(rng.normal(size=(size, size)), 3.0)
                       for _ in MALIGNANT_TONES])
    choice = fields.argmax(axis=0)
    pigment = MALIGNANT_TONES[choice] + rng.normal(0.0, 9.0, (size, size, 3))
    img = _skin(rng, size)
    img[mask] = pigment[mask]
    return SyntheticLesion(np.clip(np.rint(img), 0, 255).astype(np.uint8), mask, True)


def synthetic_lesion(seed: int, malignant: bool, size: int = 128) -> SyntheticLesion:
    rng = np.random.default_rng([seed, int(malignant)])
    return malignant_lesion(rng, size) if malignant else benign_lesion(rng, size)


def generate_fixtures(out_dir, per_class: int = 20, size: int = 128, seed: int = 0) -> Path:
    """Write images, truth masks and ``manifest.csv``; returns the manifest path."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rows = []
    for malignant, tag in ((False, "b"), (True, "m")):
        for i in range(per_class):
            lesion = synthetic_lesion(seed * 100003 + i, malignant, size)
            rid = f"syn_{tag}{i:02d}"
            write_image(out / "images" / f"{rid}.png", lesion.image)
            write_mask(out / "masks" / f"{rid}_mask.png", lesion.mask)
            rows.append((rid, f"images/{rid}.png", f"masks/{rid}_mask.png",
                         MELANOMA if malignant else NON_MELANOMA))
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "image", "mask", "label"))
        w.writerows(rows)
    return manifest
