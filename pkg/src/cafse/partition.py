"""Block grid, extrapolation areas and the support-driven processing order."""

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .imagecore import PixelState
from .kernels import bump_priorities

__all__ = [
    "FseParams",
    "PRESETS",
    "Block",
    "Category",
    "ExtrapolationArea",
    "make_grid",
    "extract_area",
    "support_priority",
    "BlockScheduler",
    "SchedulerError",
]

DEFAULT_ITERATIONS = 100
LOST = int(PixelState.LOST)
KNOWN = int(PixelState.KNOWN)
RECONSTRUCTED = int(PixelState.RECONSTRUCTED)


@dataclass(frozen=True)
class FseParams:
    block_size: int
    border: int
    fft_size: int
    rho: float = 0.7
    delta: float = 0.5
    gamma: float = 0.5
    iterations: int = DEFAULT_ITERATIONS

    def __post_init__(self):
        if self.block_size < 1 or self.border < 0:
            raise ValueError("block_size must be >= 1 and border >= 0")
        n = self.fft_size
        if n < 1 or n & (n - 1):
            raise ValueError(f"fft_size must be a power of two, got {n}")
        if self.area_size > n:
            raise ValueError(
                f"block_size + 2*border = {self.area_size} exceeds fft_size {n}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")

    @property
    def area_size(self):
        """Side of the extrapolation area (block plus support frame)."""
        return self.block_size + 2 * self.border

    @property
    def area_offset(self):
        """Offset of the area inside the fft_size grid."""
        return (self.fft_size - self.area_size) // 2

    @property
    def block_offset(self):
        """Offset of the block inside the fft_size grid."""
        return self.area_offset + self.border

    @classmethod
    def preset(cls, name, **overrides):
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        return replace(base, **overrides) if overrides else base


PRESETS = {
    "bs4": FseParams(4, 14, 32),
    "bs8": FseParams(8, 12, 32),
    "bs16": FseParams(16, 16, 64),
}


@dataclass(frozen=True)
class Block:
    row: int
    col: int
    height: int
    width: int
    index: int  # raster position in the grid

    @property
    def slices(self):
        return slice(self.row, self.row + self.height), slice(self.col, self.col + self.width)


class Category(IntEnum):
    OUTSIDE = 0
    KNOWN = 1          # originally known support
    RECONSTRUCTED = 2  # filled by an earlier block
    LOST_INSIDE = 3    # lost, inside the current block
    LOST_OUTSIDE = 4   # lost, in the support frame


# plain ints for array comparisons; attribute access on IntEnum is slow
OUTSIDE, CAT_KNOWN, CAT_RECONSTRUCTED, LOST_INSIDE, LOST_OUTSIDE = (int(c) for c in Category)


@dataclass
class ExtrapolationArea:
    samples: np.ndarray      # fft_size x fft_size, zero where not A/R
    categories: np.ndarray   # uint8 Category codes
    origin: tuple            # image coordinate of local (0, 0)
    block_offset: int        # local coordinate of the block's top-left pixel
    block_shape: tuple       # (height, width) of the possibly clipped block

    @property
    def size(self):
        return self.samples.shape[0]

    @property
    def block_slices(self):
        o = self.block_offset
        h, w = self.block_shape
        return slice(o, o + h), slice(o, o + w)

    def lost_inside(self):
        return self.categories == LOST_INSIDE

    def to_image(self, local_rows, local_cols):
        return local_rows + self.origin[0], local_cols + self.origin[1]


def make_grid(width, height, bs):
    """Raster tiling with ``bs`` x ``bs`` blocks; edge blocks are clipped."""
    if width <= 0 or height <= 0 or bs <= 0:
        raise ValueError("grid dimensions and block size must be positive")
    blocks = []
    for row in range(0, height, bs):
        for col in range(0, width, bs):
            blocks.append(Block(row, col, min(bs, height - row), min(bs, width - col), len(blocks)))
    return blocks


def extract_area(image, state, block, params):
    n = params.fft_size
    boff = params.block_offset
    lo = params.area_offset
    hi = lo + params.area_size
    height, width = image.shape
    r0 = block.row - boff
    c0 = block.col - boff

    samples = np.zeros((n, n))
    categories = np.zeros((n, n), dtype=np.uint8)

    # local window that is both inside L and inside the image
    lr0 = max(lo, -r0)
    lr1 = min(hi, height - r0)
    lc0 = max(lo, -c0)
    lc1 = min(hi, width - c0)
    if lr1 > lr0 and lc1 > lc0:
        img_rows = slice(r0 + lr0, r0 + lr1)
        img_cols = slice(c0 + lc0, c0 + lc1)
        st = state[img_rows, img_cols]
        cat = np.full(st.shape, LOST_OUTSIDE, dtype=np.uint8)
        cat[st == KNOWN] = CAT_KNOWN
        cat[st == RECONSTRUCTED] = CAT_RECONSTRUCTED
        categories[lr0:lr1, lc0:lc1] = cat
        avail = cat != LOST_OUTSIDE
        samples[lr0:lr1, lc0:lc1] = np.where(avail, image[img_rows, img_cols], 0.0)

    bsl = (slice(boff, boff + block.height), slice(boff, boff + block.width))
    inner = categories[bsl]
    inner[inner == LOST_OUTSIDE] = LOST_INSIDE
    return ExtrapolationArea(samples, categories, (r0, c0), boff, (block.height, block.width))


def _window(block, params, shape):
    d = params.border
    bs = params.block_size
    r0 = max(block.row - d, 0)
    c0 = max(block.col - d, 0)
    r1 = min(block.row + bs + d, shape[0])
    c1 = min(block.col + bs + d, shape[1])
    return slice(r0, r1), slice(c0, c1)


def support_priority(state, block, params):
    """Number of known or reconstructed pixels inside the block's area."""
    return int(np.count_nonzero(state[_window(block, params, state.shape)] != LOST))


class SchedulerError(RuntimeError):
    pass


class BlockScheduler:
    """Greedy max-support ordering over the blocks that contain lost pixels.

    Priorities live in a grid-shaped array and only ever grow (pixels go
    Lost -> Reconstructed). Selection is an argmax over the pending blocks;
    ``np.argmax`` returns the first maximum, i.e. the earliest block in raster
    order, which is the tie-break.
    """

    def __init__(self, state, params):
        self.params = params
        self.shape = state.shape
        height, width = state.shape
        bs = params.block_size
        self.blocks = make_grid(width, height, bs)
        self.grid_shape = (-(-height // bs), -(-width // bs))
        self._available = state != LOST

        # summed-area table for the initial counts
        sat = np.zeros((height + 1, width + 1), dtype=np.int64)
        sat[1:, 1:] = np.cumsum(np.cumsum(self._available, axis=0), axis=1)
        self.priority = np.zeros(self.grid_shape, dtype=np.int64)
        self._pending = np.zeros(self.grid_shape, dtype=bool)
        self._issued = np.zeros(len(self.blocks), dtype=bool)
        gw = self.grid_shape[1]
        for b in self.blocks:
            rs, cs = _window(b, params, self.shape)
            p = sat[rs.stop, cs.stop] - sat[rs.start, cs.stop] - sat[rs.stop, cs.start] \
                + sat[rs.start, cs.start]
            self.priority[b.index // gw, b.index % gw] = p
            if not self._available[b.slices].all():
                self._pending[b.index // gw, b.index % gw] = True
        self._flat_priority = self.priority.reshape(-1)
        self._flat_pending = self._pending.reshape(-1)
        self._open = self._flat_pending.copy()  # pending and not yet issued
        self.issued_priority = {}

    def __len__(self):
        return int(np.count_nonzero(self._flat_pending))

    def next_block(self):
        """Pending block with the most support, or None when exhausted."""
        if not self._open.any():
            return None
        index = int(np.argmax(np.where(self._open, self._flat_priority, -1)))
        self._open[index] = False
        self._issued[index] = True
        self.issued_priority[index] = int(self._flat_priority[index])
        return self.blocks[index]

    def mark_reconstructed(self, block, state):
        """Commit ``block``: its lost pixels become Reconstructed in ``state``
        and the neighbours' priorities absorb the new support."""
        if not self._issued[block.index] or not self._flat_pending[block.index]:
            raise SchedulerError(f"block {block.index} was not issued or is already done")
        self._flat_pending[block.index] = False
        rs, cs = block.slices
        sub = state[rs, cs]
        sub[sub == LOST] = RECONSTRUCTED
        fresh = ~self._available[rs, cs]
        self._available[rs, cs] = True
        if fresh.any():
            bump_priorities(self.priority, fresh, block.row, block.col,
                            self.params.block_size, self.params.border)
