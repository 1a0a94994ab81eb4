"""Pure-Python reference kernels.

Same contracts as the compiled ``_ckernels`` module.  The recursion performs
the identical sequence of IEEE operations, so both backends agree bit for bit.
"""
import math

import numpy as np


def rcar_path(coef, innov, x0):
    """Iterate ``x_t = coef[t] * x_{t-1} + innov[t]`` starting from ``x0``.

    Returns ``(path, overflow_step)`` where ``overflow_step`` is the 1-based
    index of the first non-finite value, or -1.  On overflow the path is
    only filled up to the step before.
    """
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    innov = np.ascontiguousarray(innov, dtype=np.float64)
    n = coef.shape[0]
    if innov.shape[0] != n:
        raise ValueError("coef and innov must have the same length")
    out = np.empty(n, dtype=np.float64)
    x = float(x0)
    isfinite = math.isfinite
    values = []
    append = values.append
    for t, (a, e) in enumerate(zip(coef.tolist(), innov.tolist())):
        x = a * x + e
        if not isfinite(x):
            out[:t] = values
            return out, t + 1
        append(x)
    out[:] = values
    return out, -1


def threshold_counts(xi, thresholds):
    """Count, row by row, how many entries of ``xi`` are ``<=`` each threshold.

    ``xi`` has shape ``(rows, R)``; the result has shape
    ``(rows, len(thresholds))`` and dtype int64.
    """
    xi = np.asarray(xi, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    out = np.empty((xi.shape[0], thresholds.shape[0]), dtype=np.int64)
    for k, thr in enumerate(thresholds):
        out[:, k] = np.count_nonzero(xi <= thr, axis=1)
    return out
