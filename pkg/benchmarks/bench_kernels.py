"""Compiled versus pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times ``rcar_path`` (the simulation recursion) and ``threshold_counts``
(the randomisation counts) on both backends, checks that the outputs are
bit-identical and prints the best-of-``repeat`` time and the speed-up.
"""
import argparse
import timeit

import numpy as np

from rcatest import _pykernels

try:
    from rcatest import _ckernels
except ImportError:  # pragma: no cover - build without a compiler
    _ckernels = None


def _cases(rng):
    n = 3000
    coef = 0.5 + 0.5 * rng.standard_normal(n)
    innov = rng.standard_normal(n)
    xi = rng.standard_normal((200, 2000))
    thr = np.array([0.01, -0.01])
    return [
        (f"rcar_path n={n}", "rcar_path", (coef, innov, 0.0)),
        ("threshold_counts 200x2000", "threshold_counts", (xi, thr)),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels unavailable; rebuild with a C compiler and Cython")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'python [ms]':>12}{'cython [ms]':>12}{'speed-up':>10}  identical")
    for label, name, call_args in _cases(rng):
        py, cy = getattr(_pykernels, name), getattr(_ckernels, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        same = _same(py(*call_args), cy(*call_args))
        print(f"{label:<28}{1e3 * t_py:>12.3f}{1e3 * t_cy:>12.3f}{t_py / t_cy:>10.1f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
