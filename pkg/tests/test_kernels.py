import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmm import _backend
from lmm import _kernels_py as ref

try:
    from lmm import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def random_lp(rng, m, N, feasible):
    A = rng.normal(size=(m, N))
    if feasible:
        b = A @ rng.random(N)
    else:
        b = rng.normal(size=m)
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    return A, b


def test_reference_ffs_matches_direct():
    p = np.array([0.0, 0.1, 0.35])
    n = 20.0
    direct = [sum(np.prod([pi - l / n for l in range(k)]) for pi in p) for k in range(5)]
    np.testing.assert_allclose(ref.falling_factorial_sums(p, n, 4), direct)


def test_reference_simplex_finds_feasible_point():
    rng = np.random.default_rng(0)
    A, b = random_lp(rng, 6, 20, True)
    x, infeas, _, status = ref.phase1_simplex(A, b, 10_000)
    assert status == ref.OPTIMAL and infeas < 1e-9
    assert np.all(x >= 0)
    np.testing.assert_allclose(A @ x, b, atol=1e-8)


def test_reference_simplex_detects_infeasible():
    A = np.array([[1.0, 1.0], [-1.0, -1.0]])
    b = np.array([1.0, 1.0])  # x1 + x2 = 1 and = -1 after sign normalisation
    _, infeas, _, status = ref.phase1_simplex(A, b, 100)
    assert status == ref.OPTIMAL and infeas > 0.5


@needs_compiled
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 40), st.booleans())
def test_simplex_backends_agree(seed, m, N, feasible):
    A, b = random_lp(np.random.default_rng(seed), m, N, feasible)
    xr, ir, itr, sr = ref.phase1_simplex(A, b, 5000)
    xc, ic, itc, sc = compiled.phase1_simplex(A, b, 5000)
    assert (sr, itr) == (sc, itc)
    np.testing.assert_allclose(xc, xr, rtol=1e-9, atol=1e-10)
    assert ic == pytest.approx(ir, rel=1e-9, abs=1e-10)


@needs_compiled
@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(0, 200), st.integers(1, 12), st.floats(1, 1e4))
def test_ffs_backends_agree(seed, size, K, n):
    p = np.random.default_rng(seed).integers(0, 50, size=size) / n
    np.testing.assert_allclose(compiled.falling_factorial_sums(p, n, K), ref.falling_factorial_sums(p, n, K),
                               rtol=1e-12, atol=1e-300)


@needs_compiled
def test_default_backend_is_compiled():
    if os.environ.get("LMM_PURE_PYTHON", "") in ("", "0"):
        assert _backend.BACKEND == "cython"


def test_pure_python_switch():
    code = "import lmm; print(lmm.BACKEND)"
    env = dict(os.environ, LMM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_estimates_identical_across_backends():
    code = (
        "import lmm, numpy as np;"
        "d = lmm.make_distribution('zipf', 300, s=1.0);"
        "rng = lmm.trial_rng(1, 0);"
        "c = lmm.draw_poissonized(d, 2000, rng);"
        "e, _ = lmm.lmm_estimate(c, lmm.LmmConfig(), rng);"
        "print(repr(e.values.round(12).tolist()))"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LMM_PURE_PYTHON=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]
