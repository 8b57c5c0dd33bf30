"""Cross-check the fast model generator against the spatial-domain oracle."""

from dataclasses import dataclass, field

import numpy as np

from .fse import generate_model, oracle_generate_model
from .partition import (CAT_KNOWN, CAT_RECONSTRUCTED, LOST_INSIDE, LOST_OUTSIDE, OUTSIDE,
                        ExtrapolationArea)
from .weighting import build_weights, centroid_of_lost

__all__ = ["random_instance", "compare_models", "OracleCheck", "run_oracle_check"]


def random_instance(rng, n=16, block=4, rho=0.7, delta=0.5):
    """Random area: A/R/Bo/Outside support around an n//2-centered block whose
    pixels are lost (Bi) or known at random. Returns ``(samples, weights)``."""
    cats = rng.choice(
        np.array([CAT_KNOWN, CAT_RECONSTRUCTED, LOST_OUTSIDE, OUTSIDE], dtype=np.uint8),
        size=(n, n), p=[0.55, 0.25, 0.15, 0.05])
    off = (n - block) // 2
    inner = rng.choice(np.array([LOST_INSIDE, CAT_KNOWN, CAT_RECONSTRUCTED], dtype=np.uint8),
                       size=(block, block), p=[0.6, 0.25, 0.15])
    inner[rng.integers(block), rng.integers(block)] = LOST_INSIDE
    cats[off:off + block, off:off + block] = inner
    cats[0, 0] = CAT_KNOWN  # never an empty window
    avail = (cats == CAT_KNOWN) | (cats == CAT_RECONSTRUCTED)
    samples = np.where(avail, rng.uniform(0.0, 255.0, size=(n, n)), 0.0)
    area = ExtrapolationArea(samples, cats, (0, 0), off, (block, block))
    weights = build_weights(cats, centroid_of_lost(area), rho, delta)
    return samples, weights


def compare_models(fast, oracle):
    """``(selection_matches, relative_coefficient_error)`` for two fits.

    The coefficient error is max |c_fast - c_oracle| / max |c_oracle|.
    """
    (fs, ft), (os_, ot) = fast, oracle
    same = ft.selected.shape == ot.selected.shape and bool(np.all(ft.selected == ot.selected))
    scale = float(np.max(np.abs(os_.coeffs), initial=0.0))
    err = float(np.max(np.abs(fs.coeffs - os_.coeffs), initial=0.0))
    rel = err / scale if scale > 0 else err
    return same, rel


@dataclass
class OracleCheck:
    instances: int
    tol: float
    failures: list = field(default_factory=list)  # (instance, selection_ok, rel_err)
    worst_rel: float = 0.0
    worst_instance: int = -1

    @property
    def passed(self):
        return not self.failures


def run_oracle_check(instances=50, seed=0, size=16, iterations=100, gamma=0.5, tol=1e-9,
                     fast=generate_model):
    rng = np.random.default_rng(seed)
    result = OracleCheck(instances, tol)
    for i in range(instances):
        samples, weights = random_instance(rng, size)
        same, rel = compare_models(fast(samples, weights, gamma, iterations),
                                   oracle_generate_model(samples, weights, gamma, iterations))
        if rel > result.worst_rel or result.worst_instance < 0:
            result.worst_rel, result.worst_instance = rel, i
        if not same or not rel < tol:
            result.failures.append((i, same, rel))
    return result
