"""Pure numpy implementation of the Lindblad kernels.

Same signatures and conventions as the compiled module. Bit-flip terms use
fancy indexing and the ladder dissipators act on the ``(2,) * 2N`` tensor
view of ``rho``.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def _popcount(dim: int) -> np.ndarray:
    pc = np.zeros(dim, dtype=np.int64)
    for shift in range(max(dim.bit_length() - 1, 0)):
        pc += (np.arange(dim) >> shift) & 1
    pc.setflags(write=False)
    return pc


@lru_cache(maxsize=4)
def _diss_diag(n_sites, gz, gp, gm):
    dim = 1 << n_sites
    pc = _popcount(dim)
    idx = np.arange(dim)
    pab = pc[idx[:, None] ^ idx[None, :]]
    psum = pc[:, None] + pc[None, :]
    out = -2.0 * gz * pab - 0.5 * (gp * psum + gm * (2 * n_sites - psum))
    out.setflags(write=False)
    return out


def lindblad_rhs(rho, masks, coeffs, hdiag, n_sites, gz, gp, gm):
    rho = np.asarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    idx = np.arange(dim)
    hdiag = np.asarray(hdiag, dtype=float)
    acc = (hdiag[:, None] - hdiag[None, :]) * rho
    for m, c in zip(np.asarray(masks), np.asarray(coeffs)):
        flip = idx ^ int(m)
        acc += c * (rho[flip, :] - rho[:, flip])
    out = -1j * acc
    out += _diss_diag(int(n_sites), float(gz), float(gp), float(gm)) * rho
    if gp or gm:
        shape = (2,) * (2 * n_sites)
        t = rho.reshape(shape)
        o = out.reshape(shape)
        for i in range(n_sites):
            s0 = [slice(None)] * (2 * n_sites)
            s1 = list(s0)
            s0[i] = s0[n_sites + i] = 0
            s1[i] = s1[n_sites + i] = 1
            if gp:
                o[tuple(s0)] += gp * t[tuple(s1)]
            if gm:
                o[tuple(s1)] += gm * t[tuple(s0)]
    return out


def rk4_steps(rho_in, n_steps, dt, masks, coeffs, hdiag, n_sites, gz, gp, gm, block_diag=False):
    rho = np.array(rho_in, dtype=np.complex128, copy=True)
    args = (masks, coeffs, hdiag, n_sites, gz, gp, gm)
    for _ in range(int(n_steps)):
        k1 = lindblad_rhs(rho, *args)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, *args)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, *args)
        k4 = lindblad_rhs(rho + dt * k3, *args)
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho
