import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from numpy.testing import assert_array_equal

from rcatest import _backend, _pykernels

try:
    from rcatest import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")
    if _ckernels is not None and not os.environ.get("RCATEST_PURE_PYTHON"):
        assert _backend.BACKEND == "cython"


def test_pure_python_switch():
    code = "from rcatest import BACKEND; print(BACKEND)"
    env = dict(os.environ, RCATEST_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_recursion_matches_definition():
    coef = np.array([0.5, -1.0, 2.0])
    innov = np.array([1.0, 2.0, 3.0])
    out, step = _pykernels.rcar_path(coef, innov, 4.0)
    # 0.5*4+1 = 3, -3+2 = -1, -2+3 = 1
    assert_array_equal(out, [3.0, -1.0, 1.0])
    assert step == -1


@pytest.mark.parametrize("impl", [_pykernels, pytest.param(_ckernels, marks=needs_ext)])
def test_overflow_step_reported(impl):
    coef = np.full(10, 1e200)
    innov = np.ones(10)
    _, step = impl.rcar_path(coef, innov, 0.0)
    # x1 = 1, x2 = 1e200 + 1, x3 overflows
    assert step == 3


@needs_ext
@settings(max_examples=60, deadline=None)
@given(
    coef=hnp.arrays(np.float64, st.integers(1, 200), elements=finite),
    seed=st.integers(0, 2**32 - 1),
    x0=finite,
)
def test_recursion_backends_bit_identical(coef, seed, x0):
    innov = np.random.default_rng(seed).standard_normal(coef.shape[0])
    a, sa = _pykernels.rcar_path(coef, innov, x0)
    b, sb = _ckernels.rcar_path(coef, innov, x0)
    assert sa == sb
    n = coef.shape[0] if sa == -1 else sa - 1
    assert_array_equal(a[:n], b[:n])


@needs_ext
@settings(max_examples=60, deadline=None)
@given(
    xi=hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=40), elements=finite),
    thr=hnp.arrays(np.float64, st.integers(1, 4), elements=st.floats(allow_nan=False)),
)
def test_counts_backends_identical(xi, thr):
    assert_array_equal(_pykernels.threshold_counts(xi, thr), _ckernels.threshold_counts(xi, thr))


@needs_ext
def test_long_paths_identical():
    rng = np.random.default_rng(0)
    coef = 1.0 + 0.5 * rng.standard_normal(200_000)
    innov = rng.standard_t(1, 200_000)
    a, sa = _pykernels.rcar_path(coef, innov, 0.0)
    b, sb = _ckernels.rcar_path(coef, innov, 0.0)
    assert sa == sb == -1
    assert_array_equal(a, b)
