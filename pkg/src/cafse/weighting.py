"""Isotropic decay window for model fitting.

Known support pixels get ``rho ** dist`` and reconstructed ones
``delta * rho ** dist``, where ``dist`` is the Euclidean distance to a center;
lost and outside pixels get zero. Plain FSE centers the window on the block,
CA-FSE on the centroid of the block's lost pixels.
"""

import numpy as np

from .partition import CAT_KNOWN, CAT_RECONSTRUCTED, LOST_INSIDE

__all__ = ["EmptyBlockError", "block_center", "centroid_of_lost", "build_weights", "weight_center"]


class EmptyBlockError(ValueError):
    """The block has no lost pixels, so there is nothing to center on."""


def _coordinate_mean(selection):
    rows, cols = np.nonzero(selection)
    return float(np.mean(rows)), float(np.mean(cols))


def block_center(area):
    """Mean coordinate of the block's pixels (fractional for even sizes)."""
    sel = np.zeros(area.categories.shape, dtype=bool)
    sel[area.block_slices] = True
    return _coordinate_mean(sel)


def centroid_of_lost(area):
    lost = area.categories == LOST_INSIDE
    if not lost.any():
        raise EmptyBlockError("block has no lost pixels")
    return _coordinate_mean(lost)


def weight_center(area, mode):
    if mode == "fse":
        return block_center(area)
    if mode == "ca-fse":
        return centroid_of_lost(area)
    raise ValueError(f"unknown mode {mode!r}")


def build_weights(categories, center, rho, delta):
    n0, n1 = categories.shape
    m = np.arange(n0, dtype=np.float64)[:, None] - center[0]
    k = np.arange(n1, dtype=np.float64)[None, :] - center[1]
    decay = rho ** np.sqrt(m * m + k * k)
    w = np.zeros(categories.shape)
    known = categories == CAT_KNOWN
    rec = categories == CAT_RECONSTRUCTED
    w[known] = decay[known]
    w[rec] = delta * decay[rec]
    return w
