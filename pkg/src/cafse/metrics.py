"""PSNR over reconstructed pixels, with an optional border band excluded."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .imagecore import as_mask

__all__ = ["EvalResult", "NoPixelsError", "psnr_reconstructed", "psnr_excluding_border",
           "aggregate", "PEAK", "BORDER"]

PEAK = 255.0
BORDER = 16


class NoPixelsError(ValueError):
    """Nothing left to evaluate."""


@dataclass(frozen=True)
class EvalResult:
    psnr_db: float  # math.inf when the evaluated pixels match exactly
    pixel_count: int
    variant: str    # "all" or "border<b>"


def _psnr(original, reconstructed, select, variant):
    count = int(np.count_nonzero(select))
    if count == 0:
        raise NoPixelsError(f"no lost pixels to evaluate ({variant})")
    diff = np.asarray(original, dtype=np.float64)[select] - np.asarray(reconstructed, dtype=np.float64)[select]
    mse = float(np.mean(diff * diff))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(PEAK * PEAK / mse)
    return EvalResult(psnr, count, variant)


def psnr_reconstructed(original, reconstructed, mask):
    """PSNR with the MSE taken over the lost pixels only."""
    mask = as_mask(mask, np.shape(original))
    if np.shape(reconstructed) != mask.shape:
        raise ValueError("image shapes differ")
    return _psnr(original, reconstructed, mask, "all")


def psnr_excluding_border(original, reconstructed, mask, border=BORDER):
    """As ``psnr_reconstructed`` but ignoring lost pixels closer than
    ``border`` to any image edge."""
    mask = as_mask(mask, np.shape(original))
    h, w = mask.shape
    if h <= 2 * border or w <= 2 * border:
        raise ValueError(f"image {w}x{h} is too small for a {border}px border")
    inner = np.zeros_like(mask)
    inner[border:h - border, border:w - border] = mask[border:h - border, border:w - border]
    return _psnr(original, reconstructed, inner, f"border{border}")


def aggregate(results):
    """Mean of the per-pattern PSNR values in dB; infinite entries are dropped."""
    values = [r.psnr_db if isinstance(r, EvalResult) else float(r) for r in results]
    if not values:
        raise ValueError("nothing to aggregate")
    finite = [v for v in values if math.isfinite(v)]
    if len(finite) < len(values):
        warnings.warn(f"dropping {len(values) - len(finite)} lossless result(s) from the mean",
                      RuntimeWarning, stacklevel=2)
    if not finite:
        return math.inf
    return float(np.mean(finite))
