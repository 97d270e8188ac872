"""Compare the numba and pure-numpy backends on the hot kernels.

    python3 benchmarks/bench_kernels.py --size 512 --repeat 5

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed ``--repeat`` times; the median is reported. Outputs of the
two backends are checked for equality before timing.
"""
import argparse
import statistics
import time

import numpy as np

from mapeval import _accel
from mapeval.grid import OccupancyGrid
from mapeval.imgproc import (
    connected_components,
    detect_corners,
    gaussian_smooth,
    harris_response,
    trace_contours,
)
from mapeval.metrics import evaluate_map


def make_inputs(size: int, seed: int):
    rng = np.random.default_rng(seed)
    img = rng.random((size, size))
    binary = rng.random((size, size)) < 0.45
    occ = rng.choice([0.0, 0.1, 0.9, 1.0], size=(size, size), p=[0.6, 0.1, 0.1, 0.2])
    occ[rng.random((size, size)) < 0.15] = np.nan
    return img, binary, OccupancyGrid(occ)


def kernels(img, binary, grid):
    resp = harris_response(img)
    return {
        "gaussian_smooth": lambda: gaussian_smooth(img, 2.0),
        "connected_components": lambda: connected_components(binary, 8).labels,
        "trace_contours": lambda: trace_contours(binary).hole_count,
        "detect_corners": lambda: [(c.x, c.y) for c in detect_corners(resp, 0.01, 2)],
        "evaluate_map": lambda: evaluate_map(grid).to_dict(),
    }


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def time_call(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256, help="image side in pixels")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", help="subset of kernel names")
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba unavailable (not installed or MAPEVAL_DISABLE_NUMBA set); timing numpy only")
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    table = kernels(*make_inputs(args.size, args.seed))
    names = args.only or list(table)

    print(f"size {args.size}x{args.size}, median of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name in names:
        fn = table[name]
        times, outputs = {}, {}
        for b in backends:
            _accel.USE_NUMBA = b == "numba"
            outputs[b] = fn()  # warm-up, includes JIT compilation
            times[b] = time_call(fn, args.repeat)
        if len(backends) == 2 and not _same(outputs["numpy"], outputs["numba"]):
            print(f"{name}: backends disagree")
            return 1
        row = f"{name:<22}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{times['numpy'] / times['numba']:>11.1f}x"
        print(row)
    _accel.USE_NUMBA = _accel.HAVE_NUMBA
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
