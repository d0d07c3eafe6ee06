"""Small synthetic masks and images shared by the tests."""
import numpy as np
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp


def disk_mask(shape, cx, cy, r):
    yy, xx = np.mgrid[0:shape[0], 0:shape[1]]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def ellipse_mask(shape, cx, cy, a, b):
    yy, xx = np.mgrid[0:shape[0], 0:shape[1]]
    return ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0


def disk_image(size=96, r=20, inside=40, outside=200):
    m = disk_mask((size, size), (size - 1) / 2, (size - 1) / 2, r)
    return np.where(m, inside, outside).astype(np.uint8), m


def masks(max_side=12, min_side=1):
    shape = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shape.flatmap(lambda s: hnp.arrays(bool, s))


def mask_pairs(max_side=12):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shape.flatmap(lambda s: st.tuples(hnp.arrays(bool, s), hnp.arrays(bool, s)))
