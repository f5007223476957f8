import subprocess
import sys

import numpy as np
import pytest

from decaylab import kernels
from decaylab._accel import _numba

needs_numba = pytest.mark.skipif(_numba is None, reason="numba not installed")


@pytest.fixture(scope="module")
def args(params):
    return params.args


@needs_numba
def test_spectral_offset_backends_agree(args, params):
    u = np.concatenate([np.linspace(-params.M - 1, 0, 500), np.geomspace(1e-9, 1e6, 500)])
    for k in (0, 1, 2):
        a = kernels.spectral_offset_np(u, *args, k)
        b = kernels.spectral_offset_nb(u, *args, k)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


@needs_numba
def test_continued_density_backends_agree(args, params):
    lam = params.Lambda
    y = np.concatenate([np.geomspace(1e-6, 1e8, 400), lam * (1 + np.linspace(-0.1, 0.1, 101))])
    z = np.concatenate([-1j * y, y + 0j, lam * (0.98 + 1.01j) + 0 * y[:5]])
    a = kernels.continued_density_np(z, *args)
    b = kernels.continued_density_nb(z, *args)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=0)


@needs_numba
@pytest.mark.parametrize("name", ["oscillate", "oscillate_deficit"])
def test_weight_backends_agree(name):
    rng = np.random.default_rng(1)
    v = rng.normal(size=300) + 1j * rng.normal(size=300)
    x = rng.uniform(-1e3, 1e3, 300)
    a = getattr(kernels, f"{name}_np")(v, x, 0.37)
    b = getattr(kernels, f"{name}_nb")(v, x, 0.37)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@needs_numba
def test_background_backends_agree(args):
    s = np.linspace(0.0, 60.0, 1001)
    for power in (0, 1):
        for t in (1e-4, 1.0, 1e9):
            a = kernels.background_integrand_np(s, t, power, *args)
            b = kernels.background_integrand_nb(s, t, power, *args)
            np.testing.assert_allclose(a, b, rtol=1e-11, atol=0)


def test_density_smooth_through_cauchy_switch(args, params):
    # Entering the reconstruction disc must not introduce a visible jump.
    lam = params.Lambda
    r = kernels.CAUCHY_SWITCH
    y = lam * np.array([1 + r * (1 - 1e-9), 1 + r * (1 + 1e-9)])
    d = kernels.continued_density_np(-1j * y, *args)
    assert abs(d[0] - d[1]) <= 1e-8 * abs(d[0])


def test_dispatch_shapes(args):
    u = np.zeros((3, 4))
    assert kernels.spectral_offset(u, *args).shape == (3, 4)
    assert kernels.continued_density(np.ones((2, 2), complex), *args).shape == (2, 2)
    assert np.ndim(kernels.continued_density_np(1.0 + 0j, *args)) == 0


def test_numpy_backend_env_flag():
    code = "import decaylab._accel as a, decaylab.kernels as k; print(a.BACKEND, k.spectral_offset is k.spectral_offset_np)"
    out = subprocess.run([sys.executable, "-c", code], env={"DECAYLAB_BACKEND": "numpy", "PATH": ""},
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["numpy", "True"]
