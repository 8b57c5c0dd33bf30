import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafse.metrics import NoPixelsError, aggregate, psnr_excluding_border, psnr_reconstructed


def test_unit_mse():
    orig = np.full((20, 20), 100.0)
    rec = orig.copy()
    mask = np.zeros((20, 20), bool)
    mask[3:7, 3:9] = True
    rec[mask] += np.where(np.arange(mask.sum()) % 2, 1.0, -1.0)
    r = psnr_reconstructed(orig, rec, mask)
    assert r.psnr_db == pytest.approx(10 * math.log10(65025), abs=1e-9)
    assert r.psnr_db == pytest.approx(48.1308, abs=1e-3)
    assert r.pixel_count == 24 and r.variant == "all"


def test_exact_match_is_infinite():
    img = np.arange(64.0).reshape(8, 8)
    mask = np.eye(8, dtype=bool)
    assert psnr_reconstructed(img, img.copy(), mask).psnr_db == math.inf


def test_errors_outside_mask_ignored():
    img = np.arange(64.0).reshape(8, 8)
    rec = img + 50.0
    mask = np.zeros((8, 8), bool)
    mask[2, 2] = True
    rec[2, 2] = img[2, 2] + 5.0
    assert psnr_reconstructed(img, rec, mask).psnr_db == pytest.approx(10 * math.log10(65025 / 25))


def test_empty_mask_error():
    with pytest.raises(NoPixelsError):
        psnr_reconstructed(np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((4, 4), bool))


def test_border_interior_equals_plain(rng):
    orig = rng.uniform(0, 255, (64, 64))
    rec = rng.uniform(0, 255, (64, 64))
    mask = np.zeros((64, 64), bool)
    mask[16:48, 16:48] = rng.random((32, 32)) < 0.3
    assert psnr_excluding_border(orig, rec, mask).psnr_db == psnr_reconstructed(orig, rec, mask).psnr_db


def test_border_only_mask_error():
    mask = np.zeros((64, 64), bool)
    mask[:16, :] = True
    mask[:, 48:] = True
    with pytest.raises(NoPixelsError):
        psnr_excluding_border(np.zeros((64, 64)), np.ones((64, 64)), mask)


def test_border_too_small_image():
    with pytest.raises(ValueError):
        psnr_excluding_border(np.zeros((32, 40)), np.zeros((32, 40)), np.ones((32, 40), bool))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 10))
def test_border_mixed_mask(seed, border):
    rng = np.random.default_rng(seed)
    orig = rng.uniform(0, 255, (30, 26))
    rec = rng.uniform(0, 255, (30, 26))
    mask = rng.random((30, 26)) < 0.4
    rows, cols = np.nonzero(mask)
    keep = (rows >= border) & (rows < 30 - border) & (cols >= border) & (cols < 26 - border)
    if not keep.any():
        with pytest.raises(NoPixelsError):
            psnr_excluding_border(orig, rec, mask, border)
        return
    d = orig[rows[keep], cols[keep]] - rec[rows[keep], cols[keep]]
    expected = 10 * math.log10(255.0 ** 2 / np.mean(d ** 2))
    r = psnr_excluding_border(orig, rec, mask, border)
    assert r.psnr_db == pytest.approx(expected, rel=1e-12)
    assert r.pixel_count == keep.sum() and r.variant == f"border{border}"


def test_aggregate():
    assert aggregate([30.0, 32.0, 34.0]) == pytest.approx(32.0)
    with pytest.warns(RuntimeWarning):
        assert aggregate([30.0, math.inf, 34.0]) == pytest.approx(32.0)
    with pytest.raises(ValueError):
        aggregate([])
