"""Corrupt / reconstruct / evaluate sweeps and their CSV output."""

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .fse import MODES, reconstruct_image
from .lossgen import generate_pattern, measure_density, pattern_spec
from .metrics import NoPixelsError, aggregate, psnr_excluding_border, psnr_reconstructed
from .partition import FseParams

__all__ = ["RunRow", "BenchJob", "run_job", "run_bench", "aggregate_rows", "rows_to_csv",
           "parse_seeds", "worker_cap", "WORKERS_ENV"]

log = logging.getLogger(__name__)

WORKERS_ENV = "CAFSE_MAX_WORKERS"
CSV_FIELDS = ["image_id", "method", "preset", "pattern_seed", "variant", "psnr_db", "pixel_count",
              "aggregate", "diff_db", "pattern", "density", "max_imag", "preserved", "error"]


@dataclass
class RunRow:
    image_id: str
    method: str
    preset: str
    pattern_seed: str
    variant: str
    psnr_db: float
    pixel_count: int
    aggregate: bool = False
    diff_db: float | None = None
    pattern: str = "dense"
    density: float | None = None
    max_imag: float | None = None
    preserved: bool | None = None
    max_energy_rise: float | None = None
    error: str = ""


@dataclass(frozen=True)
class BenchJob:
    image_id: str
    image: np.ndarray
    preset: str
    seed: int
    pattern: str = "dense"
    modes: tuple = MODES
    border: int = 0
    density: float | None = None
    dilation: int = 8
    literal_threshold: float | None = None
    iterations: int | None = None


def parse_seeds(text):
    """``"1..10"``, ``"1,4,7"`` or a mix such as ``"1..3,9"``."""
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def worker_cap(requested=None):
    """Worker count: ``requested`` (default 1), limited by $CAFSE_MAX_WORKERS.
    With no request the environment value itself is used."""
    cap = os.environ.get(WORKERS_ENV)
    cap = max(int(cap), 1) if cap else None
    if requested is None:
        return cap or 1
    return max(1, min(requested, cap) if cap else requested)


def run_job(job):
    """One (image, preset, seed): generate the mask and run every mode."""
    img = np.asarray(job.image, dtype=np.float64)
    h, w = img.shape
    spec = pattern_spec(job.pattern, job.seed, job.density, job.dilation, job.literal_threshold)
    mask = generate_pattern(w, h, spec)
    density = measure_density(mask)
    params = FseParams.preset(job.preset)
    if job.iterations is not None:
        params = FseParams.preset(job.preset, iterations=job.iterations)
    rows = []
    for mode in job.modes:
        base = dict(image_id=job.image_id, method=mode, preset=job.preset,
                    pattern_seed=str(job.seed), pattern=job.pattern, density=density)
        try:
            out, report = reconstruct_image(img, mask, params, mode)
            totals = report.totals()
            preserved = bool(np.array_equal(out[~mask], img[~mask]))
            extra = dict(max_imag=totals["max_imag"], preserved=preserved,
                         max_energy_rise=totals["max_energy_rise"])
            evals = [psnr_reconstructed(img, out, mask)]
            if job.border:
                try:
                    evals.append(psnr_excluding_border(img, out, mask, job.border))
                except NoPixelsError as exc:
                    rows.append(RunRow(variant=f"border{job.border}", psnr_db=math.nan,
                                       pixel_count=0, error=str(exc), **base, **extra))
            for ev in evals:
                rows.append(RunRow(variant=ev.variant, psnr_db=ev.psnr_db,
                                   pixel_count=ev.pixel_count, **base, **extra))
        except Exception as exc:  # reported per row, the sweep goes on
            log.exception("run failed: %s %s %s seed %s", job.image_id, job.preset, mode, job.seed)
            rows.append(RunRow(variant="all", psnr_db=math.nan, pixel_count=0,
                               error=f"{type(exc).__name__}: {exc}", **base))
    return rows


def _sort_key(row, preset_order):
    seed = (1, 0) if row.aggregate else (0, int(row.pattern_seed))
    return (row.image_id, preset_order.get(row.preset, 99), row.pattern, row.variant,
            MODES.index(row.method) if row.method in MODES else 9, seed)


def aggregate_rows(rows):
    """Mean PSNR per (image, preset, pattern, variant, method), with the
    CA-FSE minus FSE difference on the CA-FSE aggregate row."""
    groups = {}
    for r in rows:
        if r.aggregate or r.error:
            continue
        groups.setdefault((r.image_id, r.preset, r.pattern, r.variant, r.method), []).append(r)
    out = {}
    for key, members in groups.items():
        image_id, preset, pattern, variant, method = key
        out[key] = RunRow(image_id, method, preset, "mean", variant,
                          aggregate([m.psnr_db for m in members]),
                          int(sum(m.pixel_count for m in members)), aggregate=True,
                          pattern=pattern,
                          density=float(np.mean([m.density for m in members])))
    for (image_id, preset, pattern, variant, method), row in out.items():
        if method == "ca-fse":
            ref = out.get((image_id, preset, pattern, variant, "fse"))
            if ref is not None:
                row.diff_db = row.psnr_db - ref.psnr_db
    return list(out.values())


def run_bench(images, presets, seeds, *, modes=MODES, pattern="dense", border=0, workers=None,
              density=None, dilation=8, literal_threshold=None, iterations=None):
    """Full sweep. ``images`` maps an id to a gray image array. Returns the run
    rows followed by the aggregate rows, in a fixed order."""
    jobs = [BenchJob(image_id, img, preset, seed, pattern, tuple(modes), border, density,
                     dilation, literal_threshold, iterations)
            for image_id, img in images.items() for preset in presets for seed in seeds]
    n = worker_cap(workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(run_job, jobs))
    else:
        results = [run_job(j) for j in jobs]
    rows = [r for batch in results for r in batch]
    order = {p: i for i, p in enumerate(presets)}
    rows.sort(key=lambda r: _sort_key(r, order))
    aggs = aggregate_rows(rows)
    aggs.sort(key=lambda r: _sort_key(r, order))
    return rows + aggs


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6f}" if abs(v) >= 1e-3 or v == 0.0 else f"{v:.6e}"
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        d = asdict(r)
        writer.writerow([_cell(d[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def rows_to_json(rows):
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return _cell(v)
        return v
    return json.dumps([{k: clean(v) for k, v in asdict(r).items()} for r in rows],
                      indent=1, sort_keys=True) + "\n"
