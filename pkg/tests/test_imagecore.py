import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from cafse.imagecore import (MalformedHeaderError, PixelState, TruncatedDataError,
                             UnsupportedBitDepthError, apply_loss, initial_state, load_image,
                             read_mask, save_image, to_luminance, write_mask)


def _png(arr, mode):
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def test_pgm_decode_identity():
    img = load_image(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    np.testing.assert_array_equal(img, [[0, 255], [128, 64]])
    assert img.dtype == np.float64


def test_pgm_header_with_comment():
    img = load_image(b"P5\n# made by hand\n3 1 255\n" + bytes([1, 2, 3]))
    np.testing.assert_array_equal(img, [[1, 2, 3]])


@pytest.mark.parametrize("data, exc", [
    (b"P2\n2 2\n255\n" + bytes(4), MalformedHeaderError),
    (b"P5\n2 x\n255\n" + bytes(4), MalformedHeaderError),
    (b"P5\n2 2\n", MalformedHeaderError),
    (b"P5\n2 2\n65535\n" + bytes(8), UnsupportedBitDepthError),
    (b"P5\n2 2\n255\n" + bytes(3), TruncatedDataError),
    (b"GIF89a", MalformedHeaderError),
])
def test_pgm_errors_are_distinct(data, exc):
    with pytest.raises(exc):
        load_image(data)


def test_png_rgb_luma():
    rgb = np.array([[[0, 0, 0], [255, 0, 0], [0, 255, 0], [255, 255, 255]]], dtype=np.uint8)
    img = load_image(_png(rgb, "RGB"))
    np.testing.assert_allclose(img, [[0.0, 76.245, 149.685, 255.0]], atol=1e-9)


def test_png_gray():
    gray = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    np.testing.assert_array_equal(load_image(_png(gray, "L")), gray)


def test_png_16bit_rejected():
    buf = io.BytesIO()
    Image.fromarray(np.full((2, 2), 1000, dtype=np.uint16)).save(buf, format="PNG")
    with pytest.raises(UnsupportedBitDepthError):
        load_image(buf.getvalue())


def test_png_truncated():
    data = _png(np.random.default_rng(0).integers(0, 256, (64, 64), dtype=np.uint8), "L")
    with pytest.raises(TruncatedDataError):
        load_image(data[: len(data) // 2])
    with pytest.raises(TruncatedDataError):
        load_image(data[:20])


def test_png_bad_signature():
    with pytest.raises(MalformedHeaderError):
        load_image(b"\x89PNX\r\n\x1a\n" + bytes(20), "png")


def test_luminance_examples():
    assert to_luminance(255, 255, 255) == pytest.approx(255.0, abs=1e-12)
    assert to_luminance(0, 0, 0) == 0.0
    assert to_luminance(0, 255, 0) == pytest.approx(0.587 * 255)


channel = st.floats(0, 255)


@given(channel, channel, channel, st.floats(0, 255))
def test_luminance_monotone_and_bounded(r, g, b, bump):
    y = to_luminance(r, g, b)
    assert -1e-9 <= y <= 255 + 1e-9
    assert to_luminance(min(r + bump, 255), g, b) >= y
    assert to_luminance(r, min(g + bump, 255), b) >= y
    assert to_luminance(r, g, min(b + bump, 255)) >= y


def test_save_rounding():
    assert save_image(np.array([[127.5]]))[-1] == 128
    assert save_image(np.array([[127.49]]))[-1] == 127
    assert list(save_image(np.array([[0.0, 255.0]]))[-2:]) == [0, 255]


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))),
       st.sampled_from(["pgm", "png"]))
def test_roundtrip_integer_images(arr, fmt):
    img = arr.astype(np.float64)
    np.testing.assert_array_equal(load_image(save_image(img, fmt)), img)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 7), elements=st.floats(0, 255)))
def test_roundtrip_real_images_equal_rounded(img):
    expected = np.clip(np.floor(img + 0.5), 0, 255)
    np.testing.assert_array_equal(load_image(save_image(img)), expected)


def test_apply_loss_examples():
    img = np.arange(80, dtype=np.float64).reshape(8, 10)
    np.testing.assert_array_equal(apply_loss(img, np.zeros_like(img, bool)), img)
    np.testing.assert_array_equal(apply_loss(img, np.ones_like(img, bool)), 0.0)
    mask = np.zeros_like(img, bool)
    mask[3, 5] = True
    out = apply_loss(img, mask)
    changed = np.argwhere(out != img)
    np.testing.assert_array_equal(changed, [[3, 5]])
    assert out[3, 5] == 0


def test_apply_loss_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_loss(np.zeros((4, 4)), np.zeros((4, 5), bool))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(0, 255)), arrays(np.bool_, (6, 6)),
       st.floats(0, 255))
def test_apply_loss_keeps_known_samples(img, mask, fill):
    out = apply_loss(img, mask, fill)
    np.testing.assert_array_equal(out[~mask], img[~mask])
    assert np.all(out[mask] == fill)


def test_mask_file_roundtrip(tmp_path):
    mask = np.random.default_rng(3).random((9, 11)) < 0.3
    write_mask(tmp_path / "m.png", mask)
    np.testing.assert_array_equal(read_mask(tmp_path / "m.png"), mask)
    with pytest.raises(ValueError):
        read_mask(tmp_path / "m.png", (9, 12))


def test_initial_state():
    mask = np.array([[True, False]])
    np.testing.assert_array_equal(initial_state(mask), [[PixelState.LOST, PixelState.KNOWN]])
