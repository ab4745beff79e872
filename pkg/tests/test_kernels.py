import numpy as np
import pytest

from conftest import random_hermitian
from scenario_witness import _kernels
from scenario_witness._accel import HAVE_NUMBA, backend

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable or disabled")


def test_backend_name():
    assert backend() in ("numba", "numpy")


@pytest.mark.parametrize("use_numba", [False, pytest.param(True, marks=needs_numba)])
@pytest.mark.parametrize("d", [1, 2, 3, 8])
def test_jacobi_against_lapack(rng, use_numba, d):
    a = np.stack([random_hermitian(d, rng) for _ in range(30)])
    lam, v = _kernels.jacobi_eigh(a, use_numba=use_numba)
    assert np.allclose(np.sort(lam, axis=1), np.linalg.eigvalsh(a), atol=1e-12)
    recon = v @ (lam[:, :, None] * np.conj(np.swapaxes(v, 1, 2)))
    assert np.abs(recon - a).max() <= 1e-10


@needs_numba
def test_jacobi_backends_agree(rng):
    a = np.stack([random_hermitian(9, rng) for _ in range(20)])
    l1, _ = _kernels.jacobi_eigh(a, use_numba=False)
    l2, _ = _kernels.jacobi_eigh(a, use_numba=True)
    assert np.allclose(np.sort(l1, axis=1), np.sort(l2, axis=1), atol=1e-12)


@pytest.mark.parametrize("use_numba", [False, pytest.param(True, marks=needs_numba)])
def test_sandwich(rng, use_numba):
    w = random_hermitian(8, rng)
    emb = rng.standard_normal((7, 8, 2)) + 1j * rng.standard_normal((7, 8, 2))
    out = _kernels.sandwich(emb, w, use_numba=use_numba)
    ref = np.conj(np.swapaxes(emb, 1, 2)) @ w @ emb
    assert np.allclose(out, ref, atol=1e-12)


def test_numpy_fallback_selected_by_env(tmp_path):
    import subprocess
    import sys

    code = "from scenario_witness._accel import backend; print(backend())"
    env = {"SCENARIO_WITNESS_DISABLE_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
