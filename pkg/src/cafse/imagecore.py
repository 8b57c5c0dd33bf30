"""Gray images, loss masks and pixel states.

Images are 2-D ``float64`` arrays with samples in [0, 255] (row-major, shape
``(height, width)``); masks are 2-D ``bool`` arrays, ``True`` meaning lost.
Samples stay real-valued in memory and are only quantised when written out.
"""

import io
from enum import IntEnum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "ImageFormatError",
    "MalformedHeaderError",
    "UnsupportedBitDepthError",
    "TruncatedDataError",
    "PixelState",
    "as_gray_image",
    "as_mask",
    "to_luminance",
    "load_image",
    "quantize",
    "save_image",
    "read_image",
    "write_image",
    "read_mask",
    "write_mask",
    "apply_loss",
    "initial_state",
]

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class ImageFormatError(ValueError):
    """Base class for decode failures."""


class MalformedHeaderError(ImageFormatError):
    pass


class UnsupportedBitDepthError(ImageFormatError):
    pass


class TruncatedDataError(ImageFormatError):
    pass


class PixelState(IntEnum):
    KNOWN = 0
    LOST = 1
    RECONSTRUCTED = 2


def as_gray_image(samples):
    """Validate and convert to a float64 image array."""
    img = np.array(samples, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 255.0:
        raise ValueError("gray image samples must lie in [0, 255]")
    return img


def as_mask(mask, shape=None):
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError(f"loss mask must be 2-D, got shape {m.shape}")
    if shape is not None and m.shape != tuple(shape):
        raise ValueError(f"mask shape {m.shape} does not match image shape {tuple(shape)}")
    return m


def to_luminance(r, g, b):
    """BT.601 luma, unquantised. Works on scalars and arrays."""
    return 0.299 * np.asarray(r, dtype=np.float64) + 0.587 * np.asarray(g, dtype=np.float64) \
        + 0.114 * np.asarray(b, dtype=np.float64)


# ---------------------------------------------------------------------------
# decoding


def _pgm_tokens(data, count):
    """Read ``count`` whitespace-separated header tokens; return them and the
    offset of the single whitespace byte that ends the header."""
    tokens = []
    pos = 2
    n = len(data)
    while len(tokens) < count:
        if pos >= n:
            raise MalformedHeaderError("PGM header ends prematurely")
        ch = data[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeaderError("unterminated comment in PGM header")
            pos = end + 1
        else:
            start = pos
            while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tok = data[start:pos]
            if not tok.isdigit():
                raise MalformedHeaderError(f"non-numeric PGM header field {tok!r}")
            tokens.append(int(tok))
    if pos >= n or not data[pos:pos + 1].isspace():
        raise MalformedHeaderError("PGM header must end with a single whitespace byte")
    return tokens, pos + 1


def _decode_pgm(data):
    if data[:2] != b"P5":
        raise MalformedHeaderError("not a binary PGM (P5) file")
    (width, height, maxval), offset = _pgm_tokens(data, 3)
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"invalid PGM dimensions {width}x{height}")
    if maxval <= 0 or maxval > 65535:
        raise MalformedHeaderError(f"invalid PGM maxval {maxval}")
    if maxval > 255:
        raise UnsupportedBitDepthError(f"PGM maxval {maxval} needs more than 8 bits")
    payload = data[offset:offset + width * height]
    if len(payload) < width * height:
        raise TruncatedDataError(f"PGM payload has {len(payload)} of {width * height} bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _decode_png(data):
    if data[:8] != PNG_MAGIC:
        raise MalformedHeaderError("missing PNG signature")
    try:
        im = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as exc:
        raise MalformedHeaderError(str(exc)) from exc
    except SyntaxError as exc:  # Pillow reports broken chunks this way
        raise MalformedHeaderError(str(exc)) from exc
    except OSError as exc:
        if "truncat" in str(exc).lower():
            raise TruncatedDataError(str(exc)) from exc
        raise MalformedHeaderError(str(exc)) from exc
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "F") or (
        im.mode in ("RGB", "RGBA") and im.info.get("bits", 8) > 8
    ):
        raise UnsupportedBitDepthError(f"PNG mode {im.mode} is deeper than 8 bits")
    try:
        im.load()
    except (OSError, SyntaxError, ValueError) as exc:
        raise TruncatedDataError(str(exc)) from exc
    if im.mode in ("L", "1"):
        return np.asarray(im.convert("L"), dtype=np.float64)
    if im.mode == "LA":
        return np.asarray(im, dtype=np.float64)[..., 0]
    rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    return to_luminance(rgb[..., 0], rgb[..., 1], rgb[..., 2])


def _sniff(data, fmt):
    if fmt is not None:
        fmt = fmt.lower()
        if fmt in ("pgm", "p5", "pgm-p5"):
            return "pgm"
        if fmt == "png":
            return "png"
        raise ValueError(f"unsupported image format {fmt!r}")
    if data[:8] == PNG_MAGIC:
        return "png"
    if data[:2] == b"P5":
        return "pgm"
    raise MalformedHeaderError("unrecognised image signature")


def load_image(data, fmt=None):
    """Decode PGM (P5) or PNG bytes into a float64 gray image."""
    data = bytes(data)
    if _sniff(data, fmt) == "png":
        return _decode_png(data)
    return _decode_pgm(data)


# ---------------------------------------------------------------------------
# encoding


def quantize(image):
    """Round half up and clamp to the 8-bit range."""
    return np.clip(np.floor(np.asarray(image, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def save_image(image, fmt="pgm"):
    q = quantize(image)
    if q.ndim != 2:
        raise ValueError("only 2-D gray images can be saved")
    fmt = _sniff(b"", fmt)
    if fmt == "pgm":
        h, w = q.shape
        return f"P5\n{w} {h}\n255\n".encode("ascii") + q.tobytes()
    buf = io.BytesIO()
    Image.fromarray(q, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def _fmt_from_path(path):
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return "png"
    if suffix in (".pgm", ".pnm"):
        return "pgm"
    return None


def read_image(path):
    return load_image(Path(path).read_bytes())


def write_image(path, image):
    Path(path).write_bytes(save_image(image, _fmt_from_path(path) or "pgm"))


def read_mask(path, shape=None):
    """Mask files are gray images where any sample > 0 marks a lost pixel."""
    return as_mask(read_image(path) > 0, shape)


def write_mask(path, mask):
    write_image(path, np.where(as_mask(mask), 255.0, 0.0))


# ---------------------------------------------------------------------------


def apply_loss(image, mask, fill=0.0):
    """Copy of ``image`` with lost samples replaced by ``fill``."""
    img = np.asarray(image, dtype=np.float64)
    mask = as_mask(mask, img.shape)
    if not 0.0 <= fill <= 255.0:
        raise ValueError("fill value must lie in [0, 255]")
    out = img.copy()
    out[mask] = fill
    return out


def initial_state(mask):
    mask = as_mask(mask)
    return np.where(mask, PixelState.LOST, PixelState.KNOWN).astype(np.uint8)
