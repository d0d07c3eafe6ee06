"""Pixel grid and binary mask primitives.

Images are numpy arrays: ``uint8`` of shape ``(H, W)`` for grayscale or
``(H, W, 3)`` for RGB. Masks are ``bool`` arrays of shape ``(H, W)``.
Every function here is pure and returns a new array.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage as ndi

LUMA = (0.299, 0.587, 0.114)


class IncompatibleMasksError(ValueError):
    pass


class EmptyMaskError(ValueError):
    pass


def as_image(img) -> np.ndarray:
    """Validate and coerce to a uint8 image array."""
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return arr


def as_mask(m) -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise IncompatibleMasksError(f"mask shapes differ: {a.shape} vs {b.shape}")


def to_grayscale(img) -> np.ndarray:
    img = as_image(img)
    if img.ndim == 2:
        return img
    rgb = img.astype(np.float64)
    gray = LUMA[0] * rgb[..., 0] + LUMA[1] * rgb[..., 1] + LUMA[2] * rgb[..., 2]
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


# -- structuring elements ---------------------------------------------------

def disk(radius: int) -> np.ndarray:
    """Euclidean disk footprint; radius 1 is the 4-connected plus."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return xx * xx + yy * yy <= r * r


def square(size: int) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError("square size must be odd and >= 1")
    return np.ones((size, size), dtype=bool)


def line(length: int, angle: float) -> np.ndarray:
    """Centered digital line of ``length`` pixels at ``angle`` degrees.

    Angles follow the usual counter-clockwise convention with rows pointing
    down, so 90 degrees is a vertical line.
    """
    if length < 1 or length % 2 == 0:
        raise ValueError("line length must be odd and >= 1")
    half = length // 2
    theta = np.deg2rad(angle)
    c, s = np.cos(theta), np.sin(theta)
    t = np.arange(-half, half + 1)
    # step one pixel along the dominant axis so every point is distinct
    if abs(c) >= abs(s):
        dx = t * int(np.sign(c))
        dy = np.rint(-dx * s / c).astype(int)
    else:
        dy = -t * int(np.sign(s))
        dx = np.rint(-dy * c / s).astype(int)
    out = np.zeros((length, length), dtype=bool)
    out[dy + half, dx + half] = True
    return out


def structuring_element(shape: str, size: int, angle: float = 0.0) -> np.ndarray:
    if shape == "disk":
        return disk(size)
    if shape == "square":
        return square(size)
    if shape == "line":
        return line(size, angle)
    raise ValueError(f"unknown structuring element shape {shape!r}")


def _offsets(se: np.ndarray) -> list[tuple[int, int]]:
    se = np.asarray(se, dtype=bool)
    if se.ndim != 2 or se.shape[0] % 2 == 0 or se.shape[1] % 2 == 0:
        raise ValueError("structuring element must be 2-D with odd sides")
    if not se.any():
        raise ValueError("structuring element is empty")
    cy, cx = se.shape[0] // 2, se.shape[1] // 2
    return [(int(y) - cy, int(x) - cx) for y, x in zip(*np.nonzero(se))]


# -- binary morphology ------------------------------------------------------

def dilate(m, se=None) -> np.ndarray:
    """Binary dilation; the input is replicate-padded at the image border."""
    m = as_mask(m)
    se = disk(1) if se is None else se
    offs = _offsets(se)
    pad = max(max(abs(dy), abs(dx)) for dy, dx in offs)
    padded = np.pad(m, pad, mode="edge")
    h, w = m.shape
    out = np.zeros_like(m)
    for dy, dx in offs:
        out |= padded[pad + dy:pad + dy + h, pad + dx:pad + dx + w]
    return out


def erode(m, se=None) -> np.ndarray:
    """Binary erosion with zero padding (outside the image is background)."""
    m = as_mask(m)
    se = disk(1) if se is None else se
    offs = _offsets(se)
    pad = max(max(abs(dy), abs(dx)) for dy, dx in offs)
    padded = np.pad(m, pad, mode="constant")
    h, w = m.shape
    out = np.ones_like(m)
    for dy, dx in offs:
        out &= padded[pad + dy:pad + dy + h, pad + dx:pad + dx + w]
    return out


def _neighbor_count8(m: np.ndarray) -> np.ndarray:
    p = np.pad(m.astype(np.uint8), 1)
    h, w = m.shape
    total = np.zeros((h, w), dtype=np.uint8)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy or dx:
                total += p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return total


def remove_spurs(m, iterations: int | None = 1) -> np.ndarray:
    """Delete pixels with exactly one 8-connected foreground neighbor.

    ``iterations=None`` runs until nothing changes.
    """
    if iterations is not None and iterations < 1:
        raise ValueError("iterations must be >= 1")
    out = as_mask(m).copy()
    n = 0
    while iterations is None or n < iterations:
        spurs = out & (_neighbor_count8(out) == 1)
        if not spurs.any():
            break
        out &= ~spurs
        n += 1
    return out


def mask_and(a, b) -> np.ndarray:
    a, b = as_mask(a), as_mask(b)
    _check_pair(a, b)
    return a & b


def mask_subtract(a, b) -> np.ndarray:
    a, b = as_mask(a), as_mask(b)
    _check_pair(a, b)
    return a & ~b


def mask_complement(a) -> np.ndarray:
    return ~as_mask(a)


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return ndi.generate_binary_structure(2, 1)
    if connectivity == 8:
        return ndi.generate_binary_structure(2, 2)
    raise ValueError("connectivity must be 4 or 8")


def largest_component(m, connectivity: int = 8) -> np.ndarray:
    """Keep the largest connected component.

    Ties go to the component containing the smallest row-major index.
    """
    m = as_mask(m)
    labels, n = ndi.label(m, structure=_structure(connectivity))
    if n <= 1:
        return m.copy()
    sizes = np.bincount(labels.ravel())[1:]
    flat = labels.ravel()
    first = np.full(n, flat.size, dtype=np.int64)
    nz = np.flatnonzero(flat)
    np.minimum.at(first, flat[nz] - 1, nz)
    best = sorted(range(n), key=lambda k: (-sizes[k], first[k]))[0]
    return labels == best + 1


def fill_holes(m) -> np.ndarray:
    return ndi.binary_fill_holes(as_mask(m))


def area(m) -> int:
    return int(np.count_nonzero(as_mask(m)))


def boundary(m) -> np.ndarray:
    """Foreground pixels with at least one background 4-neighbor.

    Pixels outside the image count as background.
    """
    m = as_mask(m)
    p = np.pad(m, 1)
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return m & ~interior


def perimeter(m) -> int:
    m = as_mask(m)
    if not m.any():
        raise EmptyMaskError("perimeter of an empty mask")
    return int(np.count_nonzero(boundary(m)))


def centroid(m) -> tuple[float, float]:
    """Mean foreground coordinate as ``(x, y)``."""
    m = as_mask(m)
    ys, xs = np.nonzero(m)
    if ys.size == 0:
        raise EmptyMaskError("centroid of an empty mask")
    return float(xs.mean()), float(ys.mean())


# -- file I/O ---------------------------------------------------------------

def read_image(path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "F", "1"):
            return as_image(np.asarray(im.convert("L")))
        return as_image(np.asarray(im.convert("RGB")))


def write_image(path, img) -> None:
    img = as_image(img)
    Image.fromarray(img).save(Path(path))


def read_mask(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr > 127


def write_mask(path, m) -> None:
    m = as_mask(m)
    Image.fromarray(np.where(m, 255, 0).astype(np.uint8)).save(Path(path))
