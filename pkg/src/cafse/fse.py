"""Frequency selective extrapolation: model generation and image reconstruction.

Per block, a real signal is approximated on the support pixels by a sparse
sum of 2-D Fourier basis functions ``exp(+2j*pi*(k1*m + k2*n)/N)``. Each
iteration picks the frequency whose weighted residual projection is largest,
adds ``gamma * R_w[u] / W[0, 0]`` to it and the conjugate to its mirror
frequency, and updates the residual spectrum in place.
"""

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .imagecore import as_gray_image, as_mask, initial_state
from .partition import LOST_INSIDE, RECONSTRUCTED, BlockScheduler, extract_area
from .weighting import build_weights, weight_center

__all__ = [
    "UnreconstructableBlockError",
    "SpectrumSymmetryError",
    "ModelSpectrum",
    "IterationTrace",
    "generate_model",
    "oracle_generate_model",
    "evaluate_model",
    "reconstruct_block",
    "reconstruct_image",
    "BlockRecord",
    "RunReport",
    "MODES",
]

log = logging.getLogger(__name__)

MODES = ("fse", "ca-fse")
REALNESS_LIMIT = 1e-6 * 255


class UnreconstructableBlockError(ValueError):
    """The weighting window is zero everywhere: no support to fit."""


class SpectrumSymmetryError(ValueError):
    pass


@dataclass
class ModelSpectrum:
    coeffs: np.ndarray  # complex N x N

    @property
    def size(self):
        return self.coeffs.shape[0]

    def symmetry_error(self):
        c = self.coeffs
        neg = (-np.arange(c.shape[0])) % c.shape[0]
        return float(np.max(np.abs(c - np.conj(c[neg][:, neg])), initial=0.0))


@dataclass
class IterationTrace:
    selected: np.ndarray       # (iterations, 2) frequency indices
    increments: np.ndarray     # complex coefficient increments
    energy_before: np.ndarray  # sum(w * r**2) before each step
    energy_after: np.ndarray

    def energies(self):
        """Residual energy at iteration 0, 1, ..., iterations."""
        if len(self.energy_before) == 0:
            return np.zeros(0)
        return np.concatenate([self.energy_before[:1], self.energy_after])

    def max_relative_rise(self):
        e = self.energies()
        if e.size < 2 or e[0] <= 0.0:
            return 0.0
        return float(max(np.max(np.diff(e)), 0.0) / e[0])


def _check_inputs(samples, weights):
    samples = np.asarray(samples, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] != samples.shape[1] or samples.shape != weights.shape:
        raise ValueError("samples and weights must be matching square arrays")
    n = samples.shape[0]
    if n & (n - 1):
        raise ValueError(f"transform size must be a power of two, got {n}")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(weights > 0):
        raise UnreconstructableBlockError("weighting window is zero everywhere")
    return samples, weights


def generate_model(samples, weights, gamma, iterations, *, kernel=None):
    """Fast transform-domain fit. Returns ``(ModelSpectrum, IterationTrace)``."""
    samples, weights = _check_inputs(samples, weights)
    run = kernel or kernels.matching_pursuit
    coeffs, selected, increments, e_before, e_after = run(samples, weights, gamma, int(iterations))
    return ModelSpectrum(coeffs), IterationTrace(selected, increments, e_before, e_after)


def oracle_generate_model(samples, weights, gamma, iterations):
    """Reference fit by explicit spatial-domain projections.

    Every projection is a direct sum over pixels against an explicitly built
    basis, and the residual is re-derived from the full model each iteration.
    Cost is O(N**4) per step, so keep N small.
    """
    samples, weights = _check_inputs(samples, weights)
    n = samples.shape[0]
    if n > 32:
        raise ValueError("oracle is limited to N <= 32")
    m, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    pix_m, pix_k = m.ravel(), k.ravel()
    freq = [(a, b) for a in range(n) for b in range(n)]
    # basis[x, f] = exp(+j 2 pi (k1 m + k2 n) / N)
    f1 = np.array([f[0] for f in freq])
    f2 = np.array([f[1] for f in freq])
    basis = np.exp(2j * np.pi * (np.outer(pix_m, f1) + np.outer(pix_k, f2)) / n)
    w = weights.ravel()
    f = np.where(weights > 0, samples, 0.0).ravel()
    norm = np.sum(w)  # sum_x w |phi|^2

    candidates = [(a, b) for (a, b) in freq if (a, b) <= ((n - a) % n, (n - b) % n)]
    coeffs = np.zeros(n * n, dtype=np.complex128)
    selected = np.zeros((iterations, 2), dtype=np.int64)
    increments = np.zeros(iterations, dtype=np.complex128)
    e_before = np.zeros(iterations)
    e_after = np.zeros(iterations)

    def residual():
        g = basis @ coeffs
        return f - g.real

    r = residual()
    for it in range(iterations):
        e_before[it] = float(np.sum(w * r * r))
        proj = np.conj(basis).T @ (r * w)
        best, u = -1.0, candidates[0]
        for cand in candidates:
            v = abs(proj[cand[0] * n + cand[1]]) ** 2
            if v > best:
                best, u = v, cand
        mirror = ((n - u[0]) % n, (n - u[1]) % n)
        dc = gamma * proj[u[0] * n + u[1]] / norm
        if mirror == u:
            dc = complex(dc.real, 0.0)
            coeffs[u[0] * n + u[1]] += dc
        else:
            coeffs[u[0] * n + u[1]] += dc
            coeffs[mirror[0] * n + mirror[1]] += np.conj(dc)
        selected[it] = u
        increments[it] = dc
        r = residual()
        e_after[it] = float(np.sum(w * r * r))
    return (ModelSpectrum(coeffs.reshape(n, n)),
            IterationTrace(selected, increments, e_before, e_after))


def evaluate_model(spectrum, coords=None, *, tol=1e-9):
    """Real part of ``g[m, n] = sum_k c_k exp(+j 2 pi k.(m, n) / N)``.

    ``coords`` is a ``(rows, cols)`` pair of index arrays; ``None`` returns the
    whole N x N grid. Returns ``(values, max_abs_imag)``.
    """
    c = spectrum.coeffs
    n = c.shape[0]
    scale = max(float(np.max(np.abs(c), initial=0.0)), 1.0)
    if spectrum.symmetry_error() > tol * scale:
        raise SpectrumSymmetryError("model spectrum is not conjugate symmetric")
    g = np.fft.ifft2(c) * (n * n)
    if coords is not None:
        g = g[coords]
    max_imag = float(np.max(np.abs(g.imag), initial=0.0))
    if max_imag >= REALNESS_LIMIT:
        raise SpectrumSymmetryError(f"model has imaginary part {max_imag:.3g}")
    return g.real, max_imag


def reconstruct_block(image, state, area, spectrum):
    """Write the clamped model into the block's lost pixels; returns the
    number of pixels written and the largest imaginary residue."""
    lost = area.categories == LOST_INSIDE
    if not lost.any():
        return 0, 0.0
    rows, cols = np.nonzero(lost)
    values, max_imag = evaluate_model(spectrum, (rows, cols))
    ir, ic = area.to_image(rows, cols)
    image[ir, ic] = np.clip(values, 0.0, 255.0)
    state[ir, ic] = RECONSTRUCTED
    return rows.size, max_imag


# ---------------------------------------------------------------------------


@dataclass
class BlockRecord:
    row: int
    col: int
    lost: int
    priority: int
    iterations: int
    final_energy: float
    max_energy_rise: float
    max_imag: float
    center_row: float
    center_col: float
    unreconstructable: bool = False


@dataclass
class RunReport:
    mode: str
    params: dict
    blocks: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)  # block index -> IterationTrace
    elapsed: float = 0.0

    @property
    def unreconstructable(self):
        return [b for b in self.blocks if b.unreconstructable]

    def totals(self):
        return {
            "mode": self.mode,
            "blocks": len(self.blocks),
            "lost_pixels": int(sum(b.lost for b in self.blocks)),
            "unreconstructable_blocks": len(self.unreconstructable),
            "max_energy_rise": max((b.max_energy_rise for b in self.blocks), default=0.0),
            "max_imag": max((b.max_imag for b in self.blocks), default=0.0),
        }

    def write_csv(self, path):
        fields = list(BlockRecord.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fields)
            for b in self.blocks:
                writer.writerow([_fmt(getattr(b, f)) for f in fields])

    def to_dict(self):
        # elapsed time is kept out so reports are reproducible byte for byte
        return {"params": self.params, "totals": self.totals(),
                "blocks": [asdict(b) for b in self.blocks]}

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def reconstruct_image(image, mask, params, mode="ca-fse", *, keep_traces=False):
    """Fill every lost pixel of ``image``; returns ``(output, RunReport)``.

    Blocks are visited in support order. A block whose area holds no usable
    support at all is filled with the mean of the originally known pixels and
    flagged in the report.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    src = as_gray_image(image)
    mask = as_mask(mask, src.shape)
    out = src.copy()
    state = initial_state(mask)
    report = RunReport(mode, asdict(params))
    known = ~mask
    fallback = float(np.mean(src[known])) if known.any() else 0.0

    start = time.perf_counter()
    scheduler = BlockScheduler(state, params)
    while (block := scheduler.next_block()) is not None:
        area = extract_area(out, state, block, params)
        center = weight_center(area, mode)
        weights = build_weights(area.categories, center, params.rho, params.delta)
        try:
            spectrum, trace = generate_model(area.samples, weights, params.gamma, params.iterations)
        except UnreconstructableBlockError:
            lost = area.categories == LOST_INSIDE
            rows, cols = area.to_image(*np.nonzero(lost))
            out[rows, cols] = fallback
            log.warning("block at (%d, %d) has no support; filled with %.3f",
                        block.row, block.col, fallback)
            record = BlockRecord(block.row, block.col, int(lost.sum()),
                                 scheduler.issued_priority[block.index], 0, 0.0, 0.0, 0.0,
                                 center[0], center[1], True)
        else:
            written, max_imag = reconstruct_block(out, state, area, spectrum)
            record = BlockRecord(block.row, block.col, written,
                                 scheduler.issued_priority[block.index], params.iterations,
                                 float(trace.energy_after[-1]), trace.max_relative_rise(),
                                 max_imag, center[0], center[1])
            if keep_traces:
                report.traces[block.index] = trace
        scheduler.mark_reconstructed(block, state)
        report.blocks.append(record)
    report.elapsed = time.perf_counter() - start
    return out, report
