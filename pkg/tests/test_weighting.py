import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafse.imagecore import initial_state
from cafse.partition import PRESETS, Category, ExtrapolationArea, extract_area, make_grid
from cafse.weighting import EmptyBlockError, block_center, build_weights, centroid_of_lost


def _area(categories, block_offset=14, block_shape=(4, 4)):
    cats = np.asarray(categories, dtype=np.uint8)
    return ExtrapolationArea(np.zeros(cats.shape), cats, (0, 0), block_offset, block_shape)


def _bs4_area(lost_pixels, shape=(64, 64), block=(16, 16)):
    mask = np.zeros(shape, bool)
    for r, c in lost_pixels:
        mask[r, c] = True
    blocks = make_grid(shape[1], shape[0], 4)
    b = next(x for x in blocks if (x.row, x.col) == block)
    return extract_area(np.zeros(shape), initial_state(mask), b, PRESETS["bs4"])


def test_block_center_bs4():
    assert block_center(_bs4_area([(16, 16)])) == (15.5, 15.5)


def test_block_center_single_pixel_block():
    assert block_center(_area(np.ones((32, 32)), block_offset=10, block_shape=(1, 1))) == (10.0, 10.0)


def test_block_center_clipped_edge_block():
    area = _bs4_area([(16, 64)], shape=(64, 66), block=(16, 64))
    assert area.block_shape == (4, 2)
    assert block_center(area) == (15.5, 14.5)


def test_centroid_examples():
    cats = np.full((32, 32), Category.KNOWN)
    cats[10, 12] = Category.LOST_INSIDE
    assert centroid_of_lost(_area(cats)) == (10.0, 12.0)

    full = _bs4_area([(r, c) for r in range(16, 20) for c in range(16, 20)])
    assert centroid_of_lost(full) == block_center(full) == (15.5, 15.5)

    cats = np.full((32, 32), Category.KNOWN)
    for r, c in [(14, 14), (14, 15), (17, 17)]:
        cats[r, c] = Category.LOST_INSIDE
    m, n = centroid_of_lost(_area(cats))
    assert m == pytest.approx(15.0) and n == pytest.approx(46 / 3)

    cats = np.full((32, 32), Category.KNOWN)
    cats[14:18, 30:32] = Category.LOST_INSIDE
    assert centroid_of_lost(_area(cats)) == (15.5, 30.5)


def test_centroid_requires_lost_pixels():
    with pytest.raises(EmptyBlockError):
        centroid_of_lost(_area(np.full((32, 32), Category.KNOWN)))


def test_weight_values():
    cats = np.full((32, 32), Category.KNOWN)
    cats[10, 12] = Category.RECONSTRUCTED
    cats[0, 0] = Category.LOST_INSIDE
    cats[0, 1] = Category.LOST_OUTSIDE
    cats[0, 2] = Category.OUTSIDE
    w = build_weights(cats, (10.0, 10.0), 0.7, 0.5)
    assert w[10, 11] == pytest.approx(0.7, abs=1e-15)
    assert w[10, 12] == pytest.approx(0.5 * 0.49, abs=1e-15)
    assert w[10, 10] == 1.0
    assert w[0, 0] == w[0, 1] == w[0, 2] == 0.0


def test_degenerate_center_equality():
    area = _bs4_area([(r, c) for r in range(16, 20) for c in range(16, 20)])
    a = build_weights(area.categories, block_center(area), 0.7, 0.5)
    b = build_weights(area.categories, centroid_of_lost(area), 0.7, 0.5)
    assert np.array_equal(a, b)


def test_corner_displacement():
    area = _bs4_area([(16, 16)])
    (m0, n0), (m1, n1) = block_center(area), centroid_of_lost(area)
    assert math.hypot(m1 - m0, n1 - n0) == pytest.approx(1.5 * math.sqrt(2), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(16, 19), st.integers(16, 19)), min_size=1, max_size=16))
def test_centroid_inside_block_bbox(lost):
    area = _bs4_area(lost)
    m, n = centroid_of_lost(area)
    assert 14 <= m <= 17 and 14 <= n <= 17


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 31), st.floats(0, 31), st.floats(0.05, 0.95), st.floats(0.05, 1.0))
def test_radial_monotonicity(cm, cn, rho, delta):
    rng = np.random.default_rng(0)
    cats = rng.choice(np.array([Category.KNOWN, Category.RECONSTRUCTED, Category.LOST_OUTSIDE],
                               dtype=np.uint8), size=(32, 32))
    w = build_weights(cats, (cm, cn), rho, delta)
    m, n = np.mgrid[:32, :32]
    dist = np.hypot(m - cm, n - cn)
    for cat in (Category.KNOWN, Category.RECONSTRUCTED):
        sel = cats == cat
        order = np.argsort(dist[sel], kind="stable")
        assert np.all(np.diff(w[sel][order]) <= 1e-15)
    assert np.all(w[cats == Category.LOST_OUTSIDE] == 0)
