"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--iterations 100]

Prints per-call model-fit times for both transform sizes, then the time of a
full reconstruction of a synthetic 128x128 image with each kernel.
"""

import argparse
import time

import numpy as np

from cafse import fse, kernels
from cafse.lossgen import dense_spec, generate_pattern
from cafse.partition import PRESETS
from cafse.verify import random_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def synthetic_image(size, rng):
    y, x = np.mgrid[:size, :size] / size
    img = 128 + 60 * np.sin(9 * x + 4 * y) + 40 * np.cos(13 * y * x) + rng.normal(0, 4, (size, size))
    return np.clip(img, 0, 255)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=100)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    pairs = [("numba", kernels.matching_pursuit_jit), ("numpy", kernels.matching_pursuit_numpy)]

    print(f"{'N':>4} {'kernel':>6} {'ms/fit':>9}")
    for n in (32, 64):
        samples, weights = random_instance(rng, n, block=n // 4)
        base = None
        for name, kern in pairs:
            kern(samples, weights, 0.5, 2)  # compile / warm up
            t = best_of(lambda: kern(samples, weights, 0.5, args.iterations), args.repeat)
            base = base or t
            print(f"{n:>4} {name:>6} {1e3 * t:9.3f}  (x{t / base:.1f})")

    img = synthetic_image(128, rng)
    mask = generate_pattern(128, 128, dense_spec(1))
    print(f"\nfull reconstruction, 128x128, dense pattern, {int(mask.sum())} lost pixels")
    saved = kernels.matching_pursuit
    try:
        outputs = {}
        for preset in ("bs4", "bs16"):
            for name, kern in pairs:
                kernels.matching_pursuit = kern
                t = time.perf_counter()
                outputs[name], _ = fse.reconstruct_image(img, mask, PRESETS[preset], "ca-fse")
                print(f"{preset:>5} {name:>6} {time.perf_counter() - t:8.2f} s")
            diff = np.max(np.abs(outputs["numba"] - outputs["numpy"]))
            print(f"{preset:>5} max |numba - numpy| = {diff:.2e}")
    finally:
        kernels.matching_pursuit = saved


if __name__ == "__main__":
    main()
