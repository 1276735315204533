import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctomo import _kernels as K
from nctomo.rscode import RsParitySpec, rs_syndrome

Q = 2**31 - 1
needs_numba = pytest.mark.skipif(not K.HAS_NUMBA, reason="numba missing")


def _mat(seed, m, n, q):
    return np.random.default_rng(seed).integers(0, q, size=(m, n), dtype=np.int64)


@needs_numba
@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**32 - 1), st.sampled_from([7, 13, Q]))
def test_rref_paths_agree(m, n, seed, q):
    a = _mat(seed, m, n, q)
    if seed % 3 == 0 and m > 1:
        a[-1] = a[0] * 3 % q  # force a dependent row
    x, y = a.copy(), a.copy()
    rx, px = K.rref_numpy(x, q)
    ry, py = K.rref_jit(y, q)
    assert rx == ry and np.array_equal(px, py) and np.array_equal(x, y)


@needs_numba
@settings(max_examples=50, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_matmul_paths_agree(m, k, n, seed):
    a, b = _mat(seed, m, k, Q), _mat(seed + 1, k, n, Q)
    want = np.array([[sum(int(a[i, t]) * int(b[t, j]) for t in range(k)) % Q for j in range(n)] for i in range(m)])
    assert np.array_equal(K.matmul_numpy(a, b, Q), want)
    assert np.array_equal(K.matmul_jit(a, b, Q), want)


@needs_numba
def test_polyval_paths_agree():
    c = _mat(1, 1, 6, Q)[0]
    xs = _mat(2, 1, 50, Q)[0]
    want = np.array([sum(int(c[k]) * pow(int(x), k, Q) for k in range(6)) % Q for x in xs])
    assert np.array_equal(K.polyval_numpy(c, xs, Q), want)
    assert np.array_equal(K.polyval_jit(c, xs, Q), want)


@needs_numba
def test_rs_decode_paths_agree():
    rng = np.random.default_rng(9)
    for _ in range(200):
        l2, l1 = int(rng.integers(4, 20)), int(rng.integers(2, 4))
        locs = tuple(int(x) for x in rng.choice(np.arange(1, Q, 7919), size=l2, replace=False))
        spec = RsParitySpec(locs, l1, Q)
        w = int(rng.integers(1, l1 // 2 + 2))  # sometimes beyond half distance
        b = {int(i): int(rng.integers(1, Q)) for i in rng.choice(l2, size=w, replace=False)}
        syn = rs_syndrome(spec, b)
        py = K.rs_decode_core(syn, spec._inv, l1 // 2, Q)
        jit = K.rs_decode_jit(syn, spec._inv, l1 // 2, Q)
        assert int(py[0]) == int(jit[0])
        if int(py[0]) == 0:
            assert np.array_equal(py[1], jit[1]) and np.array_equal(py[2], jit[2])


def test_env_flag_selects_numpy():
    env = dict(os.environ, NCTOMO_DISABLE_JIT="1")
    code = (
        "from nctomo import _kernels, rscode;"
        "s = rscode.RsParitySpec((1, 2, 3, 4), 2, 7);"
        "print(_kernels.backend(), rscode.rs_decode(s, [3, 6], 1))"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "numpy" and "{1: 5}" in out.stdout


def test_default_backend():
    if os.environ.get("NCTOMO_DISABLE_JIT", "0") in ("", "0"):
        assert K.backend() == ("numba" if K.HAS_NUMBA else "numpy")
