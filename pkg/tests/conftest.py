"""Shared oracles built from explicit Kronecker products.

These helpers deliberately avoid the package's bit-mask machinery so that
the dense engine is checked against an independent construction. Site 0 is
the leftmost tensor factor and ``sigma^z = diag(1, -1)``.
"""
from __future__ import annotations

import functools

import numpy as np
import pytest

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
# raises sigma^z from -1 to +1
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SMINUS = SPLUS.T.copy()


def site_op(op, i, n):
    return functools.reduce(np.kron, [op if s == i else I2 for s in range(n)])


def ising_ring(n, j, h=0.0):
    """``j sum x_i x_{i+1} + h sum z_i`` on a ring (two sites: the bond appears twice)."""
    out = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        out += j * site_op(X, i, n) @ site_op(X, (i + 1) % n, n)
        out += h * site_op(Z, i, n)
    return out


def total_z(n):
    return sum(site_op(Z, i, n) for i in range(n))


def parity_op(n):
    return functools.reduce(np.kron, [Z] * n)


def lindblad_superop(h, jumps):
    """Column-stacking superoperator of ``-i[H, .] + sum D[L]``."""
    d = h.shape[0]
    eye = np.eye(d)
    sup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in jumps:
        ldl = op.conj().T @ op
        sup += rate * (np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye))
    return sup


def channel_jumps(n, gamma_z=0.0, gamma_plus=0.0, gamma_minus=0.0):
    jumps = []
    for i in range(n):
        if gamma_z:
            jumps.append((gamma_z, site_op(Z, i, n)))
        if gamma_plus:
            jumps.append((gamma_plus, site_op(SPLUS, i, n)))
        if gamma_minus:
            jumps.append((gamma_minus, site_op(SMINUS, i, n)))
    return jumps


def apply_superop(sup, rho):
    d = rho.shape[0]
    return (sup @ rho.reshape(-1, order="F")).reshape((d, d), order="F")


def random_density(dim, rng, rank=None):
    a = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# ------------------------------------------------ acceptance report lines

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion.

    Lines are printed immediately and repeated in the terminal summary so
    they are visible without ``-s``.
    """

    def report(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
