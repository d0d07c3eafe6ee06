import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lesionkit import raster
from oracles import boundary_count_oracle, dilate_oracle, spur_oracle
from shapes import mask_pairs, masks


def test_grayscale_examples():
    white = np.full((2, 2, 3), 255, np.uint8)
    assert (raster.to_grayscale(white) == 255).all()
    red = np.zeros((2, 2, 3), np.uint8)
    red[..., 0] = 255
    assert (raster.to_grayscale(red) == 76).all()
    pair = np.array([[[0, 0, 0], [0, 255, 0]]], np.uint8)
    assert raster.to_grayscale(pair).tolist() == [[0, 150]]


def test_grayscale_single_channel_passthrough(rng):
    g = rng.integers(0, 256, (5, 7), dtype=np.uint8)
    assert np.array_equal(raster.to_grayscale(g), g)


def test_image_validation():
    with pytest.raises(ValueError):
        raster.as_image(np.zeros((4, 4, 2)))
    with pytest.raises(ValueError):
        raster.as_image(np.zeros((0, 3)))


def test_structuring_elements():
    assert raster.disk(1).sum() == 5
    assert raster.square(3).sum() == 9
    horiz = raster.line(5, 0)
    assert horiz[2].all() and horiz.sum() == 5
    vert = raster.line(5, 90)
    assert vert[:, 2].all() and vert.sum() == 5
    diag = raster.line(5, 45)
    # 45 degrees runs up and to the right
    assert diag[0, 4] and diag[4, 0] and diag.sum() == 5
    with pytest.raises(ValueError):
        raster.line(4, 0)


def test_dilate_examples():
    empty = np.zeros((5, 5), bool)
    assert not raster.dilate(empty, raster.disk(2)).any()
    m = np.zeros((5, 5), bool)
    m[2, 2] = True
    plus = raster.dilate(m, raster.disk(1))
    assert plus.sum() == 5
    assert plus[1, 2] and plus[3, 2] and plus[2, 1] and plus[2, 3]


def test_dilate_block_clipped_plus():
    m = np.zeros((7, 7), bool)
    m[2:5, 2:5] = True
    out = raster.dilate(m, raster.disk(1))
    assert np.array_equal(out, dilate_oracle(m, raster.disk(1)))
    # 5x5 plus-dilation: the 5x5 box minus its four corners
    want = np.zeros((7, 7), bool)
    want[1:6, 1:6] = True
    want[1, 1] = want[1, 5] = want[5, 1] = want[5, 5] = False
    assert np.array_equal(out, want)
    # a full 3x3 image stays full
    assert raster.dilate(np.ones((3, 3), bool), raster.disk(1)).all()


@given(masks(10), st.sampled_from(["disk1", "disk2", "square3", "line5_45", "line5_135"]))
def test_dilate_matches_sweep_oracle(m, se_name):
    se = {"disk1": raster.disk(1), "disk2": raster.disk(2), "square3": raster.square(3),
          "line5_45": raster.line(5, 45), "line5_135": raster.line(5, 135)}[se_name]
    assert np.array_equal(raster.dilate(m, se), dilate_oracle(m, se))


@given(mask_pairs(10))
def test_dilate_extensive_and_monotone(pair):
    a, b = pair
    se = raster.disk(1)
    da = raster.dilate(a, se)
    assert (da >= a).all()
    assert raster.area(da) >= raster.area(a)
    union = a | b
    assert (raster.dilate(union, se) >= da).all()


@given(masks(6), st.integers(0, 4), st.integers(0, 4))
def test_dilate_commutes_with_translation(m, dy, dx):
    h, w = m.shape
    canvas = np.zeros((h + 12, w + 12), bool)
    canvas[4:4 + h, 4:4 + w] = m
    moved = np.roll(canvas, (dy, dx), axis=(0, 1))
    se = raster.disk(1)
    assert np.array_equal(raster.dilate(moved, se),
                          np.roll(raster.dilate(canvas, se), (dy, dx), axis=(0, 1)))


def test_remove_spurs_examples():
    block = np.zeros((5, 5), bool)
    block[1:4, 1:4] = True
    assert np.array_equal(raster.remove_spurs(block), block)
    line = np.zeros((3, 7), bool)
    line[1, 1:6] = True
    out = raster.remove_spurs(line, 1)
    assert out[1].tolist() == [False, False, True, True, True, False, False]
    assert not raster.remove_spurs(np.zeros((4, 4), bool)).any()
    with pytest.raises(ValueError):
        raster.remove_spurs(block, 0)


@given(masks(10))
def test_remove_spurs_matches_neighbor_oracle(m):
    assert np.array_equal(raster.remove_spurs(m, 1), spur_oracle(m))


@given(masks(10))
def test_remove_spurs_fixed_point(m):
    fixed = raster.remove_spurs(m, None)
    assert (fixed <= m).all()
    assert np.array_equal(raster.remove_spurs(fixed, 1), fixed)


def test_set_operations():
    a = np.zeros((1, 3), bool)
    b = np.zeros((1, 3), bool)
    a[0, :2] = True
    b[0, 1:] = True
    assert raster.mask_and(a, b).tolist() == [[False, True, False]]
    assert raster.mask_subtract(a, b).tolist() == [[True, False, False]]
    assert not raster.mask_and(a, raster.mask_complement(a)).any()
    assert np.array_equal(raster.mask_subtract(a, np.zeros_like(a)), a)
    with pytest.raises(raster.IncompatibleMasksError):
        raster.mask_and(a, np.zeros((3, 1), bool))
    with pytest.raises(raster.IncompatibleMasksError):
        raster.mask_subtract(a, np.zeros((2, 3), bool))


@given(mask_pairs(8))
def test_subtract_disjoint_from_b(pair):
    a, b = pair
    assert not (raster.mask_subtract(a, b) & b).any()


def test_largest_component_examples():
    m = np.zeros((8, 8), bool)
    m[0:2, 0:5] = True  # 10 pixels
    m[5:8, 7] = True  # 3 pixels
    big = raster.largest_component(m)
    assert big.sum() == 10 and big[0, 0]
    blob = np.zeros((4, 4), bool)
    blob[1:3, 1:3] = True
    assert np.array_equal(raster.largest_component(blob), blob)
    tie = np.zeros((5, 5), bool)
    tie[4, 0:3] = True
    tie[0, 2:5] = True
    out = raster.largest_component(tie)
    assert out[0, 2:5].all() and not out[4].any()
    assert not raster.largest_component(np.zeros((3, 3), bool)).any()


def test_largest_component_connectivity():
    diag = np.eye(4, dtype=bool)
    assert raster.largest_component(diag, 8).sum() == 4
    assert raster.largest_component(diag, 4).sum() == 1


@given(masks(10))
def test_largest_component_not_larger(m):
    out = raster.largest_component(m)
    assert raster.area(out) <= raster.area(m)
    assert (out <= m).all()


def test_measurements():
    block = np.ones((3, 3), bool)
    assert raster.area(block) == 9
    assert raster.perimeter(block) == 8
    assert raster.centroid(block) == (1.0, 1.0)
    px = np.ones((1, 1), bool)
    assert raster.area(px) == 1 and raster.perimeter(px) == 1
    ten = np.zeros((12, 12), bool)
    ten[1:11, 1:11] = True
    assert raster.perimeter(ten) == 36 == boundary_count_oracle(ten)
    with pytest.raises(raster.EmptyMaskError):
        raster.perimeter(np.zeros((2, 2), bool))
    with pytest.raises(raster.EmptyMaskError):
        raster.centroid(np.zeros((2, 2), bool))


@given(masks(10))
def test_perimeter_matches_oracle(m):
    if m.any():
        assert raster.perimeter(m) == boundary_count_oracle(m)


def test_fill_holes():
    ring = np.ones((5, 5), bool)
    ring[2, 2] = False
    assert raster.fill_holes(ring).all()


@given(masks(8))
def test_operations_are_pure(m):
    before = m.copy()
    a = raster.dilate(m, raster.disk(1))
    b = raster.dilate(m, raster.disk(1))
    raster.remove_spurs(m, None)
    raster.largest_component(m)
    assert np.array_equal(a, b)
    assert np.array_equal(m, before)


def test_mask_png_round_trip(tmp_path, rng):
    m = rng.random((17, 23)) > 0.5
    p = tmp_path / "m.png"
    raster.write_mask(p, m)
    assert np.array_equal(raster.read_mask(p), m)
    from PIL import Image
    with Image.open(p) as im:
        assert im.mode == "L"
        assert set(np.unique(np.asarray(im))) <= {0, 255}


def test_image_round_trip_png_and_bmp(tmp_path, rng):
    img = rng.integers(0, 256, (9, 11, 3), dtype=np.uint8)
    for name in ("a.png", "a.bmp"):
        raster.write_image(tmp_path / name, img)
        assert np.array_equal(raster.read_image(tmp_path / name), img)
