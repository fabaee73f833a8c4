import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_density
from kicked_qb import _kernels
from kicked_qb.dense import _bond_masks, _parity_block_diagonal, _sz, build_hamiltonians, gibbs_state
from kicked_qb.thermal import Charger, ThermalParams

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="compiled kernel not built")

RATES = [(0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.0, 0.05, 0.2), (0.07, 0.03, 0.11)]


def _args(n, j=0.7):
    ham = build_hamiltonians(n, Charger(j, 0.2, 1.0))
    return ham, ham.h_i.masks, ham.h_i.coeffs.astype(float), ham.h_i.diag.astype(float)


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("rates", RATES)
def test_rhs_backends_agree(n, rates, rng):
    dim = 2**n
    if n == 1:
        masks, coeffs, diag = np.zeros(0, dtype=np.int64), np.zeros(0), np.array([0.3, -0.3])
    else:
        _, masks, coeffs, diag = _args(n)
        diag = diag + 0.4 * _sz(n)
    rho = random_density(dim, rng)
    a = _kernels.compiled.lindblad_rhs(rho, masks, coeffs, diag, n, *rates)
    b = _kernels.fallback.lindblad_rhs(rho, masks, coeffs, diag, n, *rates)
    np.testing.assert_allclose(a, b, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("block_diag", [False, True])
@pytest.mark.parametrize("rates", RATES)
def test_rk4_backends_agree(block_diag, rates, rng):
    n = 4
    ham, masks, coeffs, diag = _args(n)
    if block_diag:
        rho = gibbs_state(build_hamiltonians(n, thermal=ThermalParams(0.5, 1.0, 1.0)).h_th, 1.0)
        assert _parity_block_diagonal(rho)
    else:
        rho = random_density(16, rng)
    a = _kernels.compiled.rk4_steps(rho, 20, 0.01, masks, coeffs, diag, n, *rates, block_diag)
    b = _kernels.fallback.rk4_steps(rho, 20, 0.01, masks, coeffs, diag, n, *rates, block_diag)
    np.testing.assert_allclose(a, b, atol=1e-13)
    np.testing.assert_allclose(a, a.conj().T, atol=1e-15)


@needs_compiled
def test_compiled_rk4_does_not_touch_input(rng):
    _, masks, coeffs, diag = _args(3)
    rho = random_density(8, rng)
    before = rho.copy()
    _kernels.compiled.rk4_steps(rho, 5, 0.1, masks, coeffs, diag, 3, 0.1, 0.1, 0.1, False)
    np.testing.assert_array_equal(rho, before)


def test_bond_masks():
    np.testing.assert_array_equal(np.sort(_bond_masks(4)), np.sort([0b1100, 0b0110, 0b0011, 0b1001]))


def test_pure_python_switch():
    env = dict(os.environ, KICKED_QB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from kicked_qb import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name_matches_module():
    assert _kernels.BACKEND == ("cython" if _kernels.compiled is not None else "python")
