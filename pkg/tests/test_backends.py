import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasicompact import _kernels, _pykernels
from quasicompact.kernels import REFLECT_LAST, make_birth_death

ck = pytest.importorskip("quasicompact._ckernels")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=60), st.floats(1.01, 5.0))
def test_pair_scan_agrees(vals, gamma):
    f = np.array(vals)
    a = ck.m1_pair_max(f, math.log(gamma))
    b = _pykernels.m1_pair_max(f, math.log(gamma))
    assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-300)


def test_pair_scan_constant():
    f = np.full(10, 2.0)
    assert ck.m1_pair_max(f, 0.5)[0] == _pykernels.m1_pair_max(f, 0.5)[0] == 0.0


def test_power_history_agrees():
    P = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    A = P.csr(200, REFLECT_LAST)
    x = np.random.default_rng(0).normal(size=201)
    a = ck.csr_power_history(A.indptr, A.indices, A.data, x, 30)
    b = _pykernels.csr_power_history(A.indptr, A.indices, A.data, x, 30)
    assert a.shape == (31, 201)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
    dense = A.toarray()
    assert np.allclose(a[5], np.linalg.matrix_power(dense, 5) @ x, atol=1e-12)


@pytest.mark.parametrize("exponent", [1.0, 2.0, 3.5])
def test_coupled_moments_agree(exponent):
    rng = np.random.default_rng(1)
    m, n = 500, 12
    x1, x2 = rng.normal(size=m), rng.normal(size=m)
    scale = np.full((m, n), 0.5)
    shift = rng.normal(size=(m, n))
    a = ck.coupled_affine_moments(x1, x2, scale, shift, exponent, 0.0)
    b = _pykernels.coupled_affine_moments(x1, x2, scale, shift, exponent, 0.0)
    assert np.allclose(a[0], b[0], rtol=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-12)


def test_fallback_selected_by_environment():
    env = dict(os.environ, QUASICOMPACT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import quasicompact; print(quasicompact.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _kernels.BACKEND in ("cython", "python")
