import os
import subprocess
import sys

import numpy as np
import pytest

from superradiance import _kernels_py, oracle
from superradiance._backend import COMPILED, kernels
from superradiance.core import SystemParams, basis_state

compiled = pytest.mark.skipif(not COMPILED, reason="compiled extension not built")


def _euler_inputs():
    params = SystemParams(gamma1=0.7, gamma2=1.3, gamma_d=2.0, beta=0.6, delta=1.0, gamma_p=0.1)
    heff, idx, coef = oracle._euler_setup(params, with_pump=True)
    rho0 = np.ascontiguousarray(basis_state("e1g2"))
    checkpoints = np.array([0, 10, 250, 1000], dtype=np.int64)
    return heff, idx, coef, rho0, 1e-5, checkpoints


@compiled
def test_euler_kernels_agree():
    args = _euler_inputs()
    np.testing.assert_allclose(kernels.euler_integrate(*args), _kernels_py.euler_integrate(*args), atol=1e-14)


@compiled
def test_spectral_sum_kernels_agree(rng):
    w = rng.normal(size=16) + 1j * rng.normal(size=16)
    lam = -np.abs(rng.normal(size=16)) + 1j * rng.normal(size=16)
    t = np.linspace(0, 5, 101)
    np.testing.assert_allclose(kernels.spectral_sum(w, lam, t), _kernels_py.spectral_sum(w, lam, t), rtol=1e-13, atol=1e-13)


def test_fallback_kernel_first_checkpoint_is_initial_state():
    out = _kernels_py.euler_integrate(*_euler_inputs())
    np.testing.assert_array_equal(out[0], basis_state("e1g2"))


def test_fallback_selected_by_environment():
    env = dict(os.environ, SUPERRADIANCE_PURE_PYTHON="1")
    code = "import superradiance._backend as b; print(b.COMPILED, b.kernels.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out == ["False", "superradiance._kernels_py"]
