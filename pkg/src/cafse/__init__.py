"""Frequency selective extrapolation (FSE) and its centroid-adapted variant
(CA-FSE) for reconstructing arbitrarily shaped lost image areas."""

from .fse import (ModelSpectrum, IterationTrace, RunReport, evaluate_model, generate_model,
                  oracle_generate_model, reconstruct_image)
from .imagecore import apply_loss, load_image, read_image, save_image, to_luminance, write_image
from .lossgen import LossPatternSpec, generate_pattern, measure_density
from .metrics import aggregate, psnr_excluding_border, psnr_reconstructed
from .partition import PRESETS, FseParams

__version__ = "0.1.0"

__all__ = [
    "FseParams",
    "PRESETS",
    "ModelSpectrum",
    "IterationTrace",
    "RunReport",
    "generate_model",
    "oracle_generate_model",
    "evaluate_model",
    "reconstruct_image",
    "LossPatternSpec",
    "generate_pattern",
    "measure_density",
    "psnr_reconstructed",
    "psnr_excluding_border",
    "aggregate",
    "load_image",
    "save_image",
    "read_image",
    "write_image",
    "apply_loss",
    "to_luminance",
]
