import os
import subprocess
import sys

import numpy as np
import pytest

from tmk import kernels
from tmk.kernels import get_backend

NB = get_backend("numba")
NP = get_backend("numpy")


def test_backend_names():
    assert kernels.BACKEND in ("numba", "numpy")
    with pytest.raises(ValueError):
        get_backend("fortran")


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("true", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, TMK_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "import tmk.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cell_indices_agree(rng, n):
    pts = rng.integers(-300, 301, size=(5000, n))
    np.testing.assert_array_equal(NB.cell_indices(pts), NP.cell_indices(pts))


def test_cell_histogram_agree():
    lo, hi = np.array([-20, -9]), np.array([17, 30])
    np.testing.assert_array_equal(NB.cell_histogram(lo, hi, 14), NP.cell_histogram(lo, hi, 14))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_opnorms_agree_with_svd(rng, m):
    a = rng.standard_normal((300, m, m)) + 1j * rng.standard_normal((300, m, m))
    want = np.linalg.svd(a, compute_uv=False)[:, 0]
    np.testing.assert_allclose(NB.opnorms(a), want, rtol=1e-12)
    np.testing.assert_allclose(NP.opnorms(a), want, rtol=1e-12)


def test_corner_differences_agree(rng):
    a = rng.standard_normal((5, 4, 3, 2, 2)) + 0j
    np.testing.assert_allclose(NB.corner_differences(a, 3), NP.corner_differences(a, 3), atol=1e-14)


def test_smooth_step_agree_and_limits():
    t = np.linspace(-1, 2, 301)
    a, b = NB.smooth_step(t), NP.smooth_step(t)
    np.testing.assert_allclose(a, b, atol=1e-15)
    assert a[0] == 0.0 and a[-1] == 1.0
    np.testing.assert_allclose(NP.smooth_step(np.array([0.5])), [0.5])


def test_trbdf2_agree(rng):
    steps, K, m = 7, 5, 2
    a_nodes = rng.standard_normal((steps + 1, K, m, m)) * 0.3 + 2 * np.eye(m) + 0j
    a_stage = rng.standard_normal((steps, K, m, m)) * 0.3 + 2 * np.eye(m) + 0j
    f_nodes = rng.standard_normal((steps + 1, K, m)) + 0j
    f_stage = rng.standard_normal((steps, K, m)) + 0j
    u0 = rng.standard_normal((K, m)) + 1j
    args = (a_nodes, a_stage, f_nodes, f_stage, u0, 0.1, 2 - 2 ** 0.5)
    np.testing.assert_allclose(NB.trbdf2(*args), NP.trbdf2(*args), rtol=1e-12, atol=1e-14)
