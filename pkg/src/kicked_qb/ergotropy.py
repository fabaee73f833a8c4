"""Ergotropy: the work extractable from a state by unitary operations.

The passive state puts the eigenvalues of ``rho`` in decreasing order onto
the eigenvalues of ``H_0`` in increasing order, so its energy is a dot
product of two sorted spectra.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateValidityError

__all__ = [
    "SpectralDecomposition",
    "PassiveState",
    "spectral_decomposition",
    "passive_state",
    "ergotropy",
    "normalized_ergotropy",
]

NEGATIVE_CLIP = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs sorted ``"ascending"`` or ``"descending"``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    order: str

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decomposition(m, order: str = "ascending") -> SpectralDecomposition:
    m = np.asarray(m)
    if m.ndim == 1:
        # diagonal operator; stable sort keeps degenerate levels in basis order
        perm = np.argsort(m, kind="stable")
        w = m[perm].astype(float)
        v = np.eye(len(m))[:, perm]
    else:
        w, v = np.linalg.eigh(m)
    if order == "descending":
        w, v = w[::-1], v[:, ::-1]
    elif order != "ascending":
        raise ValueError(f"unknown order {order!r}")
    return SpectralDecomposition(np.ascontiguousarray(w), np.ascontiguousarray(v), order)


@dataclass(frozen=True, eq=False)
class PassiveState:
    """Populations (non-increasing) on the ascending eigenbasis of ``H_0``."""

    populations: np.ndarray
    energy_basis: SpectralDecomposition

    @property
    def energy(self) -> float:
        return float(np.dot(self.populations, self.energy_basis.eigenvalues))

    def matrix(self) -> np.ndarray:
        v = self.energy_basis.eigenvectors
        return (v * self.populations) @ v.conj().T


def _populations(rho) -> np.ndarray:
    r = np.linalg.eigvalsh(np.asarray(rho))[::-1]
    if r[-1] < -NEGATIVE_CLIP:
        raise StateValidityError(f"state has eigenvalue {r[-1]:.3e} below -{NEGATIVE_CLIP}")
    r = np.clip(r, 0.0, None)
    return r / r.sum()


def passive_state(rho, h0) -> PassiveState:
    """Passive state of ``rho`` with respect to ``h0`` (a matrix or its diagonal)."""
    return PassiveState(_populations(rho), spectral_decomposition(h0, "ascending"))


def ergotropy(rho, h0) -> float:
    """``tr(rho H_0) - tr(rho_p H_0)``."""
    rho = np.asarray(rho)
    h0 = np.asarray(h0)
    energy = np.dot(h0, np.diagonal(rho)).real if h0.ndim == 1 else np.einsum("ij,ji->", h0, rho).real
    return float(energy - passive_state(rho, h0).energy)


def normalized_ergotropy(w_m, w_0, n_sites: int):
    """``(W(m) - W(0)) / N``."""
    return (np.asarray(w_m) - w_0) / n_sites
