"""Timing comparison of the compiled kernels against the numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. Both implementations are
imported directly, so this reports the real speedup independent of the
``SCREENCLUST_PURE`` switch.
"""

import timeit

import numpy as np

from screenclust import _kernels_py

try:
    from screenclust import _kernels
except ImportError:
    _kernels = None


def _hog_inputs(rng):
    mag = rng.random((256, 256))
    pos = rng.random((256, 256)) * 9
    bin_lo = (np.floor(pos).astype(np.int64) % 9).astype(np.int32)
    frac_hi = pos - np.floor(pos)
    return mag, bin_lo, frac_hi, 8, 9


def _assign_inputs(rng):
    return rng.standard_normal((5000, 32)), rng.standard_normal((190, 32))


def _split_inputs(rng):
    return rng.random((2000, 16)), rng.standard_normal(2000), np.ones(2000), 2, 0.0


CASES = [
    ("cell_histograms (256x256, 9 bins)", "cell_histograms", _hog_inputs, 50),
    ("assign_nearest (5000x32, k=190)", "assign_nearest", _assign_inputs, 20),
    ("best_split (2000x16)", "best_split", _split_inputs, 20),
]


def main():
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, name, make_inputs, number in CASES:
        args = make_inputs(rng)
        t_py = timeit.timeit(lambda: getattr(_kernels_py, name)(*args),
                             number=number) / number
        if _kernels is None:
            print(f"{label:40s} {t_py * 1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        t_cy = timeit.timeit(lambda: getattr(_kernels, name)(*args),
                             number=number) / number
        print(f"{label:40s} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms "
              f"{t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
